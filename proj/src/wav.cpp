#include "dlab/wav.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "dlab/errors.hpp"

namespace dlab::wav {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void wr_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open audio file: " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
        throw DataError("not a RIFF/WAVE file: " + path);
    }

    WavData wd;
    bool have_fmt = false;
    int bits = 0;
    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::uint32_t chunk_size = rd_u32(buf.data() + pos + 4);
        const bool is_fmt = std::memcmp(buf.data() + pos, "fmt ", 4) == 0;
        const bool is_data = std::memcmp(buf.data() + pos, "data", 4) == 0;
        const std::size_t body = pos + 8;
        if (body + chunk_size > buf.size()) throw DataError("truncated chunk in " + path);
        if (is_fmt) {
            if (chunk_size < 16) throw DataError("malformed fmt chunk in " + path);
            const std::uint16_t format = rd_u16(buf.data() + body);
            wd.channels = rd_u16(buf.data() + body + 2);
            wd.sample_rate = static_cast<int>(rd_u32(buf.data() + body + 4));
            bits = rd_u16(buf.data() + body + 14);
            if (format != 1) throw DataError("unsupported WAV encoding (want PCM) in " + path);
            have_fmt = true;
        } else if (is_data) {
            if (!have_fmt) throw DataError("data chunk before fmt chunk in " + path);
            if (bits != 16) throw DataError("unsupported bit depth " + std::to_string(bits) + " in " + path);
            if (wd.channels != 1) {
                throw DataError("expected mono audio, got " + std::to_string(wd.channels) + " channels in " + path);
            }
            const std::size_t n = chunk_size / 2;
            wd.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::int16_t s = static_cast<std::int16_t>(rd_u16(buf.data() + body + 2 * i));
                wd.samples[i] = static_cast<float>(s) / 32768.0f;
            }
            return wd;
        }
        pos = body + chunk_size + (chunk_size & 1);
    }
    throw DataError("no data chunk found in " + path);
}

void write_wav(const std::string& path, const std::vector<float>& samples, int sample_rate) {
    std::vector<unsigned char> out;
    out.reserve(44 + samples.size() * 2);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    wr_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    wr_u32(out, 16);
    wr_u16(out, 1);  // PCM
    wr_u16(out, 1);  // mono
    wr_u32(out, static_cast<std::uint32_t>(sample_rate));
    wr_u32(out, static_cast<std::uint32_t>(sample_rate * 2));
    wr_u16(out, 2);   // block align
    wr_u16(out, 16);  // bits
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    wr_u32(out, data_bytes);
    for (const float s : samples) {
        const float clamped = std::clamp(s, -1.0f, 1.0f);
        const auto q = static_cast<std::int16_t>(std::lround(clamped * 32767.0f));
        wr_u16(out, static_cast<std::uint16_t>(q));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write audio file: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("short write to " + path);
}

}  // namespace dlab::wav
