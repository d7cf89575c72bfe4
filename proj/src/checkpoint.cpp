/* Copyright 2026 The codeseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "codeseg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include <zlib.h>

#include "codeseg/error.hpp"

namespace codeseg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written with little-endian host layout");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    buf_.append(static_cast<const char*>(data), n);
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    T v{};
    get_bytes(&v, sizeof(T));
    return v;
  }
  void get_bytes(void* out, std::size_t n) {
    if (data_.size() - pos_ < n) fail(ErrorCode::kFormat, "checkpoint payload truncated");
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(payload.size()));
  return static_cast<std::uint32_t>(crc);
}

constexpr std::size_t kHeaderSize = 4 + sizeof(std::uint16_t);

}  // namespace

void write_model(std::ostream& out, const ModelParams& params) {
  const ArchSpec& s = params.spec;
  Writer w;
  w.put<std::uint8_t>(static_cast<std::uint8_t>(s.kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.vocab));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.embed_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.lstm_hidden));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.dense_sizes.size()));
  for (std::size_t d : s.dense_sizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.window));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.bag_dim));
  w.put<double>(s.dropout_rate);

  const auto tensors = params.tensors();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t->rows));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t->cols));
    w.put_bytes(t->data.data(), t->data.size() * sizeof(double));
  }

  const std::string& payload = w.str();
  const std::uint32_t crc = crc_of(payload);
  const std::uint16_t version = kModelFormatVersion;
  out.write(kModelMagic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
  if (!out) fail(ErrorCode::kIo, "failed writing checkpoint");
}

ModelParams read_model(std::istream& in) {
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (file.size() < 4 || std::memcmp(file.data(), kModelMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, "not a CSGM checkpoint");
  }
  if (file.size() < kHeaderSize + sizeof(std::uint32_t)) {
    fail(ErrorCode::kChecksum, "checkpoint truncated");
  }
  std::uint16_t version;
  std::memcpy(&version, file.data() + 4, sizeof(version));
  if (version != kModelFormatVersion) {
    fail(ErrorCode::kUnsupportedVersion,
         "unsupported checkpoint version " + std::to_string(version));
  }
  const std::string_view payload(file.data() + kHeaderSize,
                                 file.size() - kHeaderSize - sizeof(std::uint32_t));
  std::uint32_t stored;
  std::memcpy(&stored, file.data() + file.size() - sizeof(stored), sizeof(stored));
  if (crc_of(payload) != stored) fail(ErrorCode::kChecksum, "checkpoint checksum mismatch");

  Reader r(payload);
  ArchSpec spec;
  const auto kind = r.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(ModelKind::kCentered)) {
    fail(ErrorCode::kFormat, "unknown model kind " + std::to_string(kind));
  }
  spec.kind = static_cast<ModelKind>(kind);
  spec.vocab = r.get<std::uint32_t>();
  spec.embed_dim = r.get<std::uint32_t>();
  spec.lstm_hidden = r.get<std::uint32_t>();
  const auto n_dense = r.get<std::uint32_t>();
  if (n_dense > 64) fail(ErrorCode::kFormat, "implausible dense layer count");
  spec.dense_sizes.resize(n_dense);
  for (auto& d : spec.dense_sizes) d = r.get<std::uint32_t>();
  spec.window = r.get<std::uint32_t>();
  spec.bag_dim = r.get<std::uint32_t>();
  spec.dropout_rate = r.get<double>();

  ModelParams params = allocate_model(spec);
  auto expected = params.tensors();
  const auto count = r.get<std::uint32_t>();
  if (count != expected.size()) {
    fail(ErrorCode::kShapeMismatch, "checkpoint holds " + std::to_string(count) +
                                        " tensors, architecture needs " +
                                        std::to_string(expected.size()));
  }
  for (auto& [name, t] : expected) {
    const auto len = r.get<std::uint16_t>();
    std::string stored_name(len, '\0');
    r.get_bytes(stored_name.data(), len);
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (stored_name != name || rows != t->rows || cols != t->cols) {
      fail(ErrorCode::kShapeMismatch, "checkpoint tensor '" + stored_name + "' (" +
                                          std::to_string(rows) + "x" + std::to_string(cols) +
                                          ") does not match expected '" + name + "' (" +
                                          std::to_string(t->rows) + "x" +
                                          std::to_string(t->cols) + ")");
    }
    r.get_bytes(t->data.data(), t->data.size() * sizeof(double));
  }
  if (!r.done()) fail(ErrorCode::kFormat, "trailing bytes in checkpoint payload");
  if (!params.all_finite()) fail(ErrorCode::kNumerical, "checkpoint contains non-finite values");
  return params;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint: " + path.string());
  write_model(out, params);
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read checkpoint: " + path.string());
  return read_model(in);
}

}  // namespace codeseg
