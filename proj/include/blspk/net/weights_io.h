// include/blspk/net/weights_io.h

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

#ifndef BLSPK_NET_WEIGHTS_IO_H_
#define BLSPK_NET_WEIGHTS_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "blspk/net/blstm.h"

namespace blspk {

// Binary little-endian weight file:
//   "BLSVW001" | u8 feature kind | u32 input_dim | u32 hidden | u32 layers |
//   u8 has_head | u32 num_classes | f32 tensors | u32 CRC-32
// Tensors are written gate by gate in row-major order: per layer the forward
// direction W_i W_f W_c W_o U_i U_f U_c U_o b_i b_f b_c b_o, then the
// backward direction, then the head weights and bias. The CRC covers every
// byte after the magic.
struct WeightFile {
  EmbeddingNet net;
  std::optional<ClassifierHead<float>> head;
};

std::vector<std::uint8_t> SerializeWeights(const EmbeddingNet &net,
                                           const ClassifierHead<float> *head);
WeightFile DeserializeWeights(const std::vector<std::uint8_t> &bytes);

void SaveWeights(const EmbeddingNet &net, const ClassifierHead<float> *head,
                 const std::filesystem::path &path);
WeightFile LoadWeights(const std::filesystem::path &path);

}  // namespace blspk

#endif  // BLSPK_NET_WEIGHTS_IO_H_
