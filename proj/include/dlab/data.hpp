#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlab/errors.hpp"
#include "dlab/rng.hpp"

namespace dlab::data {

inline constexpr int kSampleRate = 16000;
inline constexpr int kSegmentSamples = 61440;  // 3.84 s at 16 kHz

enum class Split { Train, Eval };

inline std::string split_name(Split s) { return s == Split::Train ? "train" : "eval"; }

struct UtteranceRecord {
    std::string speaker_id;
    int condition = 0;  // speaker-level label, 0 or 1
    Split split = Split::Train;
    std::string path;            // WAV on disk; empty if samples held in memory
    std::vector<float> samples;  // loaded audio
    std::int64_t num_samples = 0;
};

struct Corpus {
    std::vector<UtteranceRecord> records;
    // Contiguous ids: training speakers first (0..S-1), eval-only speakers after.
    std::map<std::string, int> speaker_table;
    int num_train_speakers = 0;

    int speaker_index(const std::string& id) const {
        auto it = speaker_table.find(id);
        if (it == speaker_table.end()) throw DataError("speaker not in table: " + id);
        return it->second;
    }
};

// Builds the id table from the records (training speakers first, in order of
// first appearance) and validates labels.
void finalize_corpus(Corpus& corpus);

struct Segment {
    std::vector<float> samples;  // kSegmentSamples, mean-variance normalized
    int condition = 0;
    int speaker = 0;          // contiguous id
    int utterance_index = 0;  // index into corpus.records
    std::int64_t offset = 0;  // sample offset within the source utterance
};

struct SegmentBatch {
    std::vector<const Segment*> items;
};

// Random crop of every training utterance to the length of the shortest one,
// then consecutive non-overlapping 61440-sample segments; the remainder is
// discarded. Each segment is mean-variance normalized.
std::vector<Segment> crop_and_segment(const Corpus& corpus, std::uint64_t seed);

// Full segmentation of the eval split: no cropping, no balancing; offset 0.
std::vector<Segment> segment_eval(const Corpus& corpus);

// Exactly min(n_pos, n_neg) segments of each class, sampled without
// replacement. Returns indices into `segments`, ascending.
std::vector<std::size_t> balance_subset(const std::vector<Segment>& segments, std::uint64_t seed);

// In-place mean-variance normalization with an epsilon floor on the variance.
void normalize(std::vector<float>& samples);

std::vector<SegmentBatch> make_batches(const std::vector<Segment>& segments,
                                       const std::vector<std::size_t>& order, int batch_size);

// CSV manifest: header "speaker_id,condition,split,path", UTF-8, LF endings.
void write_manifest(const std::string& path, const Corpus& corpus);
Corpus ingest_corpus(const std::string& manifest_path);

struct SynthConfig {
    int num_speakers = 20;
    int utterances_per_speaker = 40;
    double f0_lo = 80.0, f0_hi = 320.0;                          // Hz
    double condition_effect = 0.85;                              // [0,1]
    double speaker_effect = 0.85;                                // [0,1]
    double noise_level = 0.02;
    std::int64_t utt_len_lo = 61440, utt_len_hi = 76800;  // samples
    std::uint64_t seed = 7;

    void validate() const {
        if (num_speakers < 2) throw ConfigError("synth.num_speakers must be >= 2");
        if (utterances_per_speaker < 1) throw ConfigError("synth.utterances_per_speaker must be >= 1");
        if (!(f0_lo > 0) || !(f0_hi > f0_lo)) throw ConfigError("synth.f0_range must satisfy 0 < lo < hi");
        if (condition_effect < 0 || condition_effect > 1) throw ConfigError("synth.condition_effect must be in [0,1]");
        if (speaker_effect < 0 || speaker_effect > 1) throw ConfigError("synth.speaker_effect must be in [0,1]");
        if (noise_level < 0) throw ConfigError("synth.noise_level must be >= 0");
        if (utt_len_lo < kSegmentSamples || utt_len_hi < utt_len_lo) {
            throw ConfigError("synth.utterance_len_range must satisfy 61440 <= lo <= hi");
        }
    }
};

// Per-speaker voice and per-utterance synthesis parameters; exposed so the
// null-effect contracts (condition_effect = 0, speaker_effect = 0) are
// directly testable.
struct SpeakerVoice {
    double f0 = 0;            // fundamental, Hz
    double resonance_hz = 0;  // single emphasized band
    int condition = 0;
};

struct UtteranceParams {
    double am_rate = 0;     // amplitude-modulation rate, Hz (condition cue)
    double am_depth = 0;    // modulation depth (condition cue)
    double pause_prob = 0;  // per-frame pause probability (condition cue)
    std::int64_t num_samples = 0;
};

SpeakerVoice speaker_voice(const SynthConfig& cfg, int speaker);
UtteranceParams utterance_params(const SynthConfig& cfg, int speaker, int utt);
std::vector<float> synth_utterance(const SynthConfig& cfg, int speaker, int utt);

// Generates WAVs + manifest under out_dir; returns the loaded corpus.
// Deterministic: the same config writes byte-identical files.
Corpus synth_generate(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace dlab::data
