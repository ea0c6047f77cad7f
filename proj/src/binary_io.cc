// Copyright 2026 The nisleep Authors.
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

#include "nisleep/binary_io.h"

#include <openssl/sha.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nisleep/error.h"

namespace nisleep {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

namespace {

template <typename T>
void Append(std::vector<std::uint8_t>& buf, T v) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.insert(buf.end(), raw, raw + sizeof(T));
}

}  // namespace

void ByteWriter::Magic(std::string_view magic) {
  buf_.insert(buf_.end(), magic.begin(), magic.end());
}
void ByteWriter::U8(std::uint8_t v) { buf_.push_back(v); }
void ByteWriter::U16(std::uint16_t v) { Append(buf_, v); }
void ByteWriter::U32(std::uint32_t v) { Append(buf_, v); }
void ByteWriter::U64(std::uint64_t v) { Append(buf_, v); }
void ByteWriter::F32(float v) { Append(buf_, v); }
void ByteWriter::F64(double v) { Append(buf_, v); }
void ByteWriter::String(std::string_view s) {
  U32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}
void ByteWriter::Bytes(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

ByteReader::ByteReader(std::span<const std::uint8_t> data, std::string what)
    : data_(data), what_(std::move(what)) {}

void ByteReader::Need(std::size_t n) {
  if (n > remaining()) {
    throw Error(ErrorCode::kStructural,
                what_ + ": truncated, need " + std::to_string(n) +
                    " bytes but " + std::to_string(remaining()) + " remain",
                pos_);
  }
}

void ByteReader::ExpectMagic(std::string_view magic) {
  Need(magic.size());
  if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0) {
    throw Error(ErrorCode::kStructural,
                what_ + ": bad magic, expected '" + std::string(magic) + "'",
                pos_);
  }
  pos_ += magic.size();
}

namespace {
template <typename T>
T Take(std::span<const std::uint8_t> data, std::size_t& pos) {
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
}  // namespace

std::uint8_t ByteReader::U8() { Need(1); return Take<std::uint8_t>(data_, pos_); }
std::uint16_t ByteReader::U16() { Need(2); return Take<std::uint16_t>(data_, pos_); }
std::uint32_t ByteReader::U32() { Need(4); return Take<std::uint32_t>(data_, pos_); }
std::uint64_t ByteReader::U64() { Need(8); return Take<std::uint64_t>(data_, pos_); }
float ByteReader::F32() { Need(4); return Take<float>(data_, pos_); }
double ByteReader::F64() { Need(8); return Take<double>(data_, pos_); }

std::string ByteReader::String() {
  const std::uint32_t n = U32();
  Need(n);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::span<const std::uint8_t> ByteReader::Bytes(std::size_t n) {
  Need(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view text) {
  WriteFileAtomic(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

std::string Sha256Hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

std::string Sha256Hex(std::string_view text) {
  return Sha256Hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace nisleep
