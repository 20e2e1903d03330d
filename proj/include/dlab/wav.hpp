#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlab::wav {

struct WavData {
    int sample_rate = 0;
    int channels = 0;
    std::vector<float> samples;  // mono, in [-1, 1]
};

// 16-bit PCM mono. Readers throw DataError naming the file on anything that
// is not a well-formed mono PCM16 RIFF file.
WavData read_wav(const std::string& path);
void write_wav(const std::string& path, const std::vector<float>& samples, int sample_rate);

}  // namespace dlab::wav
