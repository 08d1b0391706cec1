// Copyright 2026 The soundtrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "soundtrig/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "soundtrig/errors.hpp"

namespace soundtrig {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

std::int16_t to_pcm(double x) {
  return static_cast<std::int16_t>(std::lround(std::clamp(x, -1.0, 1.0) * 32767.0));
}

std::string encode(const std::vector<const std::vector<double>*>& channels, int sample_rate) {
  const std::size_t frames = channels.front()->size();
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * nch * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, nch);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * nch * 2);
  put_u16(out, static_cast<std::uint16_t>(nch * 2));
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto* ch : channels) {
      put_u16(out, static_cast<std::uint16_t>(to_pcm((*ch)[i])));
    }
  }
  return out;
}

std::uint32_t get_u32(const std::string& b, std::size_t at) {
  if (at + 4 > b.size()) throw FormatError("wav: truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  return v;
}

std::uint16_t get_u16(const std::string& b, std::size_t at) {
  if (at + 2 > b.size()) throw FormatError("wav: truncated");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoFailure("write failed: " + path.string());
}

}  // namespace

std::string encode_wav_mono(const Waveform& w) { return encode({&w.samples}, w.sample_rate); }

std::string encode_wav_stereo(const BinauralFrame& frame) {
  if (frame.left.size() != frame.right.size()) {
    throw FormatError("wav: binaural channels differ in length");
  }
  return encode({&frame.left.samples, &frame.right.samples}, frame.left.sample_rate);
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  write_bytes(path, encode_wav_mono(w));
}

void write_wav(const std::filesystem::path& path, const BinauralFrame& frame) {
  write_bytes(path, encode_wav_stereo(frame));
}

WavData decode_wav(const std::string& b) {
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw FormatError("wav: missing RIFF/WAVE header");
  }
  WavData out;
  int bits = 0;
  std::size_t at = 12;
  bool have_fmt = false;
  while (at + 8 <= b.size()) {
    const std::string id = b.substr(at, 4);
    const std::uint32_t len = get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (body + len > b.size()) throw FormatError("wav: chunk overruns file");
    if (id == "fmt ") {
      if (get_u16(b, body) != 1) throw FormatError("wav: only PCM is supported");
      out.channels = get_u16(b, body + 2);
      out.sample_rate = static_cast<int>(get_u32(b, body + 4));
      bits = get_u16(b, body + 14);
      if (bits != 16 || out.channels < 1) throw FormatError("wav: only 16-bit PCM is supported");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data before fmt");
      const std::size_t frames = len / (2 * out.channels);
      out.channel_samples.assign(out.channels, std::vector<double>(frames));
      for (std::size_t i = 0; i < frames; ++i) {
        for (int c = 0; c < out.channels; ++c) {
          const auto v = static_cast<std::int16_t>(get_u16(b, body + 2 * (i * out.channels + c)));
          out.channel_samples[c][i] = v / 32768.0;
        }
      }
      return out;
    }
    at = body + len + (len & 1);
  }
  throw FormatError("wav: no data chunk");
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return decode_wav(ss.str());
}

}  // namespace soundtrig
