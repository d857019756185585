// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "beamform/errors.hpp"

namespace beamform::wav {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

}  // namespace

Waveform read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("wav: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IoError("wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t size = read_u32(bytes.data() + pos + 4);
    if (pos + 8 + size > bytes.size()) break;
    if (std::memcmp(id, "fmt ", 4) == 0 && size >= 16) {
      const uint8_t* f = bytes.data() + pos + 8;
      format = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      if (format == 0xfffe && size >= 40) format = read_u16(f + 24);  // extensible
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (channels == 0 || data == nullptr) throw IoError("wav: missing fmt/data chunk: " + path);

  Waveform wav;
  wav.sample_rate = static_cast<int>(sample_rate);
  if (format == kFormatPcm && bits == 16) {
    const uint32_t n = data_size / (2u * channels);
    wav.samples.resize(n, channels);
    for (uint32_t i = 0; i < n; ++i)
      for (uint16_t c = 0; c < channels; ++c) {
        int16_t v;
        std::memcpy(&v, data + (static_cast<std::size_t>(i) * channels + c) * 2, 2);
        wav.samples(i, c) = static_cast<double>(v) / 32768.0;
      }
  } else if (format == kFormatFloat && bits == 32) {
    const uint32_t n = data_size / (4u * channels);
    wav.samples.resize(n, channels);
    for (uint32_t i = 0; i < n; ++i)
      for (uint16_t c = 0; c < channels; ++c) {
        float v;
        std::memcpy(&v, data + (static_cast<std::size_t>(i) * channels + c) * 4, 4);
        wav.samples(i, c) = static_cast<double>(v);
      }
  } else {
    throw IoError("wav: unsupported format (want pcm16 or float32): " + path);
  }
  return wav;
}

void write(const std::string& path, const Waveform& wav, const std::string& format) {
  const bool as_float = format == "float32";
  if (!as_float && format != "pcm16") throw IoError("wav: unknown format " + format);
  const int n = wav.frames();
  const int ch = wav.channels();
  if (ch <= 0) throw InvalidInputError("wav: no channels to write");
  const uint16_t bytes_per = as_float ? 4 : 2;
  const uint32_t data_size = static_cast<uint32_t>(n) * ch * bytes_per;

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, as_float ? kFormatFloat : kFormatPcm);
  put_u16(out, static_cast<uint16_t>(ch));
  put_u32(out, static_cast<uint32_t>(wav.sample_rate));
  put_u32(out, static_cast<uint32_t>(wav.sample_rate) * ch * bytes_per);
  put_u16(out, static_cast<uint16_t>(ch * bytes_per));
  put_u16(out, as_float ? 32 : 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);

  for (int i = 0; i < n; ++i)
    for (int c = 0; c < ch; ++c) {
      if (as_float) {
        const float v = static_cast<float>(wav.samples(i, c));
        const uint8_t* p = reinterpret_cast<const uint8_t*>(&v);
        out.insert(out.end(), p, p + 4);
      } else {
        const double clipped = std::clamp(wav.samples(i, c), -1.0, 1.0);
        const int16_t v = static_cast<int16_t>(std::lround(clipped * 32767.0));
        const uint8_t* p = reinterpret_cast<const uint8_t*>(&v);
        out.insert(out.end(), p, p + 2);
      }
    }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("wav: cannot write " + path);
  os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("wav: short write to " + path);
}

}  // namespace beamform::wav
