#include "dlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dlab/wav.hpp"

namespace dlab::data {

void finalize_corpus(Corpus& corpus) {
    corpus.speaker_table.clear();
    std::vector<std::string> train_order, eval_order;
    std::set<std::string> seen;
    for (const auto& r : corpus.records) {
        if (r.num_samples <= 0) throw DataError("utterance with no samples for speaker " + r.speaker_id);
        if (seen.insert(r.speaker_id + "\x1f" + split_name(r.split)).second) {
            (r.split == Split::Train ? train_order : eval_order).push_back(r.speaker_id);
        }
    }
    int next = 0;
    for (const auto& id : train_order) {
        if (!corpus.speaker_table.count(id)) corpus.speaker_table[id] = next++;
    }
    corpus.num_train_speakers = next;
    for (const auto& id : eval_order) {
        if (!corpus.speaker_table.count(id)) corpus.speaker_table[id] = next++;
    }
    // Labels are speaker-level: a speaker must carry one condition.
    std::map<std::string, int> cond;
    for (const auto& r : corpus.records) {
        auto [it, inserted] = cond.emplace(r.speaker_id, r.condition);
        if (!inserted && it->second != r.condition) {
            throw DataError("speaker " + r.speaker_id + " has conflicting condition labels");
        }
    }
}

void normalize(std::vector<float>& samples) {
    const double eps = 1e-8;
    const std::size_t n = samples.size();
    if (n == 0) return;
    double mean = 0.0;
    for (const float s : samples) mean += s;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const float s : samples) {
        const double d = s - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (auto& s : samples) s = static_cast<float>((s - mean) * inv);
}

std::vector<Segment> crop_and_segment(const Corpus& corpus, std::uint64_t seed) {
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        if (corpus.records[i].split == Split::Train) train_idx.push_back(i);
    }
    if (train_idx.empty()) throw DataError("corpus has no training utterances");

    std::string offenders;
    std::int64_t min_len = INT64_MAX;
    for (const std::size_t i : train_idx) {
        const auto& r = corpus.records[i];
        if (r.num_samples < kSegmentSamples) {
            offenders += (offenders.empty() ? "" : ", ") + r.speaker_id + ":" + r.path;
        }
        min_len = std::min(min_len, r.num_samples);
    }
    if (!offenders.empty()) {
        throw DataError("utterances shorter than one 61440-sample segment: " + offenders);
    }

    const std::int64_t per_utt = min_len / kSegmentSamples;
    Rng root(seed);
    std::vector<Segment> out;
    out.reserve(train_idx.size() * static_cast<std::size_t>(per_utt));
    for (const std::size_t i : train_idx) {
        const auto& r = corpus.records[i];
        Rng rng = root.child("crop", i);
        const std::int64_t max_start = r.num_samples - min_len;
        const std::int64_t start = max_start > 0 ? rng.uniform_int(0, max_start + 1) : 0;
        for (std::int64_t s = 0; s < per_utt; ++s) {
            Segment seg;
            const std::int64_t off = start + s * kSegmentSamples;
            seg.samples.assign(r.samples.begin() + off, r.samples.begin() + off + kSegmentSamples);
            normalize(seg.samples);
            seg.condition = r.condition;
            seg.speaker = corpus.speaker_index(r.speaker_id);
            seg.utterance_index = static_cast<int>(i);
            seg.offset = off;
            out.push_back(std::move(seg));
        }
    }
    return out;
}

std::vector<Segment> segment_eval(const Corpus& corpus) {
    std::vector<Segment> out;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& r = corpus.records[i];
        if (r.split != Split::Eval) continue;
        const std::int64_t per_utt = r.num_samples / kSegmentSamples;
        for (std::int64_t s = 0; s < per_utt; ++s) {
            Segment seg;
            const std::int64_t off = s * kSegmentSamples;
            seg.samples.assign(r.samples.begin() + off, r.samples.begin() + off + kSegmentSamples);
            normalize(seg.samples);
            seg.condition = r.condition;
            seg.speaker = corpus.speaker_index(r.speaker_id);
            seg.utterance_index = static_cast<int>(i);
            seg.offset = off;
            out.push_back(std::move(seg));
        }
    }
    return out;
}

std::vector<std::size_t> balance_subset(const std::vector<Segment>& segments, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        (segments[i].condition ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw DataError("cannot balance: class with zero segments (pos=" + std::to_string(pos.size()) +
                        ", neg=" + std::to_string(neg.size()) + ")");
    }
    const std::size_t k = std::min(pos.size(), neg.size());
    Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::size_t> out(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k));
    out.insert(out.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SegmentBatch> make_batches(const std::vector<Segment>& segments,
                                       const std::vector<std::size_t>& order, int batch_size) {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    std::vector<SegmentBatch> batches;
    SegmentBatch cur;
    for (const std::size_t i : order) {
        cur.items.push_back(&segments[i]);
        if (static_cast<int>(cur.items.size()) == batch_size) {
            batches.push_back(std::move(cur));
            cur = SegmentBatch{};
        }
    }
    if (!cur.items.empty()) batches.push_back(std::move(cur));
    return batches;
}

void write_manifest(const std::string& path, const Corpus& corpus) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write manifest: " + path);
    f << "speaker_id,condition,split,path\n";
    for (const auto& r : corpus.records) {
        f << r.speaker_id << "," << r.condition << "," << split_name(r.split) << "," << r.path << "\n";
    }
}

Corpus ingest_corpus(const std::string& manifest_path) {
    std::ifstream f(manifest_path);
    if (!f) throw DataError("cannot open manifest: " + manifest_path);
    std::string base_dir;
    if (const auto slash = manifest_path.find_last_of('/'); slash != std::string::npos) {
        base_dir = manifest_path.substr(0, slash + 1);
    }

    Corpus corpus;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "speaker_id,condition,split,path") {
                throw DataError("manifest header must be 'speaker_id,condition,split,path', got: " + line);
            }
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::string speaker, cond_s, split_s, path;
        if (!std::getline(ss, speaker, ',') || !std::getline(ss, cond_s, ',') ||
            !std::getline(ss, split_s, ',') || !std::getline(ss, path)) {
            throw DataError("malformed manifest row " + std::to_string(line_no) + ": " + line);
        }
        UtteranceRecord rec;
        rec.speaker_id = speaker;
        if (cond_s == "0") {
            rec.condition = 0;
        } else if (cond_s == "1") {
            rec.condition = 1;
        } else {
            throw DataError("manifest row " + std::to_string(line_no) + ": condition must be 0 or 1, got " + cond_s);
        }
        if (split_s == "train") {
            rec.split = Split::Train;
        } else if (split_s == "eval") {
            rec.split = Split::Eval;
        } else {
            throw DataError("manifest row " + std::to_string(line_no) + ": unknown split '" + split_s + "'");
        }
        if (!seen.insert({speaker, path}).second) {
            throw DataError("duplicate (speaker, path) row in manifest: " + speaker + "," + path);
        }
        rec.path = path;
        const std::string full = path.empty() || path[0] == '/' ? path : base_dir + path;
        auto wd = wav::read_wav(full);
        if (wd.sample_rate != kSampleRate) {
            throw DataError("expected " + std::to_string(kSampleRate) + " Hz audio, got " +
                            std::to_string(wd.sample_rate) + " Hz in " + full);
        }
        rec.samples = std::move(wd.samples);
        rec.num_samples = static_cast<std::int64_t>(rec.samples.size());
        corpus.records.push_back(std::move(rec));
    }
    if (corpus.records.empty()) throw DataError("manifest has no rows: " + manifest_path);
    finalize_corpus(corpus);
    return corpus;
}

}  // namespace dlab::data
