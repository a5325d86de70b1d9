// Copyright 2026 The ulab Authors.
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

#include "ulab/checkpoint.h"

#include <bit>
#include <cstring>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "ulab/errors.h"
#include "ulab/experiment_config.h"
#include "ulab/io.h"

namespace ulab {
namespace {

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutF64(std::string& out, double x) {
  PutU64(out, std::bit_cast<std::uint64_t>(x));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t Get(int width) {
    if (pos_ + width > bytes_.size()) {
      throw ParseError("checkpoint truncated at byte " + std::to_string(pos_),
                       0);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_ + i])}
           << (8 * i);
    }
    pos_ += width;
    return v;
  }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Get(4)); }
  std::uint64_t U64() { return Get(8); }
  double F64() { return std::bit_cast<double>(Get(8)); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string EncodeCheckpoint(const ModelParams& params) {
  const VocabSpec& spec = params.spec;
  std::string out = "ULAB";
  PutU32(out, kCheckpointVersion);
  PutU32(out, spec.vocab_size);
  PutU32(out, spec.embed_dim);
  PutU32(out, spec.seq_len);
  PutU32(out, spec.num_classes);
  for (double x : params.embedding->data()) PutF64(out, x);
  for (double x : params.head.values()) PutF64(out, x);
  PutU64(out, params.seed);
  return out;
}

ModelParams DecodeCheckpoint(std::string_view bytes) {
  if (bytes.size() < kCheckpointHeaderBytes || bytes.substr(0, 4) != "ULAB") {
    throw ParseError("not a ulab checkpoint (bad magic)", 0);
  }
  Reader in(bytes.substr(4));
  const std::uint32_t version = in.U32();
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  const std::uint32_t v = in.U32();
  const std::uint32_t d = in.U32();
  const std::uint32_t l = in.U32();
  const std::uint32_t c = in.U32();
  ModelParams params;
  params.spec = VocabSpec::Make(v, d, l, c);
  params.spec.Validate();
  std::vector<double> e(std::size_t{v} * d);
  for (double& x : e) x = in.F64();
  params.embedding = std::make_shared<const Embedding>(v, d, std::move(e));
  params.head = Head(c, d);
  for (double& x : params.head.values()) x = in.F64();
  params.seed = in.U64();
  if (!in.done()) throw ParseError("trailing bytes after checkpoint", 0);
  return params;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelParams& params) {
  WriteFileAtomic(path, EncodeCheckpoint(params));
}

ModelParams LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFile(path));
}

void SaveTrainSidecar(const std::filesystem::path& path,
                      const TrainConfig& config) {
  nlohmann::json j;
  j["train"] = TrainConfigToJson(config);
  WriteFileAtomic(path, j.dump(2) + "\n");
}

TrainConfig LoadTrainSidecar(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(ReadFile(path));
  return TrainConfigFromJson(j.at("train"));
}

}  // namespace ulab
