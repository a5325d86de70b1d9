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

#include "ulab/dataset_io.h"

#include <nlohmann/json.hpp>

#include "ulab/errors.h"
#include "ulab/io.h"

namespace ulab {
namespace {

using nlohmann::json;

json VocabToJson(const VocabSpec& v) {
  return json{{"size", v.vocab_size},
              {"embed_dim", v.embed_dim},
              {"seq_len", v.seq_len},
              {"num_classes", v.num_classes}};
}

bool SameShape(const VocabSpec& a, const VocabSpec& b) {
  return a.vocab_size == b.vocab_size && a.embed_dim == b.embed_dim &&
         a.seq_len == b.seq_len && a.num_classes == b.num_classes;
}

}  // namespace

std::string EncodeDataset(const DatasetHeader& header,
                          std::span<const Example> examples) {
  json head{{"vocab", VocabToJson(header.vocab)},
            {"seed", header.seed},
            {"split", header.split},
            {"version", header.version}};
  std::string out = head.dump() + "\n";
  for (const Example& ex : examples) {
    out += json{{"tokens", ex.tokens}, {"label", ex.label}}.dump();
    out += "\n";
  }
  return out;
}

DatasetFile DecodeDataset(std::string_view text) {
  DatasetFile file;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    try {
      if (!have_header) {
        DatasetHeader& h = file.header;
        h.version = j.at("version").get<std::uint32_t>();
        if (h.version != kDatasetFormatVersion) {
          throw ValidationError("unsupported dataset version " +
                                std::to_string(h.version));
        }
        const json& v = j.at("vocab");
        h.vocab = VocabSpec::Make(v.at("size").get<std::uint32_t>(),
                                  v.at("embed_dim").get<std::uint32_t>(),
                                  v.at("seq_len").get<std::uint32_t>(),
                                  v.at("num_classes").get<std::uint32_t>());
        h.vocab.Validate();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.split = j.at("split").get<std::string>();
        have_header = true;
        continue;
      }
      Example ex;
      ex.tokens = j.at("tokens").get<std::vector<std::uint32_t>>();
      ex.label = j.at("label").get<std::uint32_t>();
      try {
        ValidateExample(file.header.vocab, ex);
      } catch (const InputDomainError& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " +
                              e.what());
      }
      file.examples.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_no);
    } catch (const UsageError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  if (!have_header) throw ParseError("missing header line", 1);
  return file;
}

void SaveDataset(const std::filesystem::path& path,
                 const DatasetHeader& header,
                 std::span<const Example> examples) {
  WriteFileAtomic(path, EncodeDataset(header, examples));
}

DatasetFile LoadDataset(const std::filesystem::path& path,
                        const VocabSpec* expected) {
  DatasetFile file = DecodeDataset(ReadFile(path));
  if (expected != nullptr && !SameShape(*expected, file.header.vocab)) {
    throw ValidationError(path.string() +
                          ": vocabulary does not match the experiment");
  }
  return file;
}

}  // namespace ulab
