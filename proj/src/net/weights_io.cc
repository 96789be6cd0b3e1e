// src/net/weights_io.cc

// Copyright 2026   The blspk Authors

// See the LICENSE file at the repository root
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "blspk/net/weights_io.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "blspk/error.h"

namespace blspk {

namespace {

constexpr char kMagicPrefix[] = "BLSVW";
constexpr char kMagic[] = "BLSVW001";
constexpr std::size_t kMagicLen = 8;
// Sanity bound on header dimensions; real nets are far below it.
constexpr std::uint32_t kMaxDim = 1u << 16;

static_assert(std::endian::native == std::endian::little,
              "weight files are written with native little-endian floats");

class Writer {
 public:
  void Bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const std::uint8_t *>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U32(std::uint32_t v) { Bytes(&v, 4); }
  void F32(float v) { Bytes(&v, 4); }

  // Row-major dump of rows [row0, row0 + rows) of `m`.
  void RowBlock(const MatrixT<float> &m, Eigen::Index row0, Eigen::Index rows) {
    for (Eigen::Index r = row0; r < row0 + rows; ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) F32(m(r, c));
    }
  }

  std::vector<std::uint8_t> &out() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t *data, std::size_t size) : data_(data), size_(size) {}

  void Need(std::size_t n) const {
    if (pos_ + n > size_) {
      throw Error(ErrorCode::kTruncatedFile,
                  "needed " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_));
    }
  }
  std::uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v;
    std::memcpy(&v, data_ + pos_, 4);
    pos_ += 4;
    return v;
  }
  float F32() {
    Need(4);
    float v;
    std::memcpy(&v, data_ + pos_, 4);
    pos_ += 4;
    return v;
  }
  void RowBlock(MatrixT<float> *m, Eigen::Index row0, Eigen::Index rows) {
    Need(static_cast<std::size_t>(rows * m->cols()) * 4);
    for (Eigen::Index r = row0; r < row0 + rows; ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = F32();
    }
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::uint8_t *data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

void WriteDirection(const LstmDirectionParams<float> &d, Writer *w) {
  const int h = d.hidden();
  for (int g = 0; g < 4; ++g) w->RowBlock(d.w, g * h, h);
  for (int g = 0; g < 4; ++g) w->RowBlock(d.u, g * h, h);
  for (Eigen::Index i = 0; i < d.b.size(); ++i) w->F32(d.b[i]);
}

void ReadDirection(LstmDirectionParams<float> *d, Reader *r) {
  const int h = d->hidden();
  for (int g = 0; g < 4; ++g) r->RowBlock(&d->w, g * h, h);
  for (int g = 0; g < 4; ++g) r->RowBlock(&d->u, g * h, h);
  r->Need(static_cast<std::size_t>(d->b.size()) * 4);
  for (Eigen::Index i = 0; i < d->b.size(); ++i) d->b[i] = r->F32();
}

std::uint32_t Crc32(const std::uint8_t *data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      crc32(crc, data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> SerializeWeights(const EmbeddingNet &net,
                                           const ClassifierHead<float> *head) {
  Writer w;
  w.Bytes(kMagic, kMagicLen);
  w.U8(static_cast<std::uint8_t>(net.feature_kind()));
  w.U32(static_cast<std::uint32_t>(net.input_dim()));
  w.U32(static_cast<std::uint32_t>(net.hidden()));
  w.U32(static_cast<std::uint32_t>(net.num_layers()));
  w.U8(head ? 1 : 0);
  w.U32(head ? static_cast<std::uint32_t>(head->num_classes()) : 0);
  for (const auto &layer : net.layers()) {
    WriteDirection(layer.fwd, &w);
    WriteDirection(layer.bwd, &w);
  }
  if (head) {
    w.RowBlock(head->w, 0, head->w.rows());
    for (Eigen::Index i = 0; i < head->b.size(); ++i) w.F32(head->b[i]);
  }
  auto &out = w.out();
  const std::uint32_t crc = Crc32(out.data() + kMagicLen, out.size() - kMagicLen);
  w.U32(crc);
  return std::move(out);
}

WeightFile DeserializeWeights(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < kMagicLen) {
    throw Error(ErrorCode::kTruncatedFile, "shorter than the magic");
  }
  if (std::memcmp(bytes.data(), kMagicPrefix, 5) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a BLSVW weight file");
  }
  if (std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw Error(ErrorCode::kVersionMismatch,
                "weight file version " +
                    std::string(bytes.begin() + 5, bytes.begin() + 8) +
                    ", expected 001");
  }

  Reader r(bytes.data() + kMagicLen, bytes.size() - kMagicLen);
  const std::uint8_t kind_code = r.U8();
  const std::uint32_t input_dim = r.U32();
  const std::uint32_t hidden = r.U32();
  const std::uint32_t layers = r.U32();
  const std::uint8_t has_head = r.U8();
  const std::uint32_t num_classes = r.U32();
  if (kind_code > 5 || input_dim == 0 || input_dim > kMaxDim || hidden == 0 ||
      hidden > kMaxDim || layers == 0 || layers > 64 || has_head > 1 ||
      num_classes > kMaxDim * 16 || (has_head && num_classes < 2)) {
    // A corrupted header is indistinguishable from a corrupted payload.
    throw Error(ErrorCode::kChecksumMismatch, "implausible header fields");
  }
  // Validate the size before allocating.
  std::size_t floats = BlstmParamCount(input_dim, hidden, layers);
  if (has_head) floats += static_cast<std::size_t>(num_classes) * (2 * hidden + 1);
  const std::size_t expected = kMagicLen + 18 + floats * 4 + 4;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kTruncatedFile,
                std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected));
  }

  const std::size_t crc_pos = expected - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + crc_pos, 4);
  if (Crc32(bytes.data() + kMagicLen, crc_pos - kMagicLen) != stored) {
    throw Error(ErrorCode::kChecksumMismatch, "CRC-32 does not match");
  }

  WeightFile out;
  out.net = EmbeddingNet(static_cast<FeatureKind>(kind_code),
                         static_cast<int>(input_dim), static_cast<int>(hidden),
                         static_cast<int>(layers));
  for (auto &layer : out.net.layers()) {
    ReadDirection(&layer.fwd, &r);
    ReadDirection(&layer.bwd, &r);
  }
  if (has_head) {
    ClassifierHead<float> head(static_cast<int>(num_classes),
                               static_cast<int>(2 * hidden));
    r.RowBlock(&head.w, 0, head.w.rows());
    for (Eigen::Index i = 0; i < head.b.size(); ++i) head.b[i] = r.F32();
    out.head = std::move(head);
  }
  return out;
}

void SaveWeights(const EmbeddingNet &net, const ClassifierHead<float> *head,
                 const std::filesystem::path &path) {
  const auto bytes = SerializeWeights(net, head);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  os.write(reinterpret_cast<const char *>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

WeightFile LoadWeights(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return DeserializeWeights(bytes);
}

}  // namespace blspk
