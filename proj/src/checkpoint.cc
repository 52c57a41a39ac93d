// src/checkpoint.cc
//
// Copyright 2026  The MEMR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memr/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "memr/errors.h"

namespace memr {

namespace {

constexpr char kMagic[4] = {'M', 'E', 'M', 'R'};

template <class T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <class T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string get_bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw CheckpointTruncatedError(std::string("checkpoint truncated while reading ") + what);
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

void add_config(NamedParams& out, const std::string& key, double value) {
  out.emplace_back("config." + key, Tensor::scalar(value));
}

std::map<std::string, double> config_entries(const NamedParams& loaded) {
  std::map<std::string, double> out;
  for (const auto& [name, t] : loaded) {
    if (name.rfind("config.", 0) == 0 && t.size() == 1) out[name.substr(7)] = t.item();
  }
  return out;
}

int config_int(const std::map<std::string, double>& cfg, const std::string& key) {
  auto it = cfg.find(key);
  if (it == cfg.end()) throw CheckpointFormatError("checkpoint lacks config." + key);
  return static_cast<int>(it->second);
}

}  // namespace

void checkpoint_save(const NamedParams& tensors, const std::string& path) {
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xFFFF) throw ContractError("checkpoint: tensor name too long");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (int d : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw CheckpointError("failed writing " + path);
}

NamedParams checkpoint_load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open " + path);
  Reader in(std::string(std::istreambuf_iterator<char>(f), {}));

  if (in.get_bytes(4, "magic") != std::string(kMagic, 4)) throw CheckpointFormatError(path + ": bad magic, not a checkpoint");
  const auto version = in.get_le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError(path + ": format version " + std::to_string(version) + ", expected " +
                                 std::to_string(kCheckpointVersion));
  }
  const auto count = in.get_le<std::uint32_t>("entry count");
  NamedParams out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = in.get_le<std::uint16_t>("name length");
    std::string name = in.get_bytes(name_len, "name");
    const auto rank = in.get_le<std::uint8_t>("rank");
    Shape shape;
    std::size_t n = 1;
    for (int r = 0; r < rank; ++r) {
      const auto d = in.get_le<std::uint32_t>("dimension");
      if (d > (1u << 30)) throw CheckpointFormatError(path + ": implausible dimension in " + name);
      shape.push_back(static_cast<int>(d));
      n *= d;
    }
    if (n > in.remaining() / sizeof(double)) throw CheckpointTruncatedError(path + ": payload of " + name + " truncated");
    std::vector<double> data(n);
    for (double& v : data) v = std::bit_cast<double>(in.get_le<std::uint64_t>("payload"));
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!in.done()) throw CheckpointFormatError(path + ": trailing bytes after last entry");
  return out;
}

void load_into(const NamedParams& target, const NamedParams& loaded) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : loaded) by_name[name] = &t;
  for (const auto& [name, param] : target) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CheckpointFormatError("checkpoint has no parameter " + name);
    const Tensor& src = *it->second;
    if (src.shape() != param.shape()) {
      throw CheckpointShapeError("parameter " + name + ": checkpoint shape " + shape_to_string(src.shape()) +
                                 ", model expects " + shape_to_string(param.shape()));
    }
    Tensor dst = param;
    std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
  }
}

void save_model(const Model& model, const std::string& path) {
  const ModelConfig& c = model.config();
  NamedParams out;
  add_config(out, "vocab", c.num_letters);
  add_config(out, "input_dim", c.encoder.input_dim);
  add_config(out, "hidden", c.encoder.hidden);
  add_config(out, "blstm_layers", c.encoder.blstm_layers);
  add_config(out, "vgg_channels1", c.encoder.vgg_channels1);
  add_config(out, "vgg_channels2", c.encoder.vgg_channels2);
  add_config(out, "vgg_recurrent_layers", c.encoder.vgg_recurrent_layers);
  add_config(out, "attention_dim", c.attention_dim);
  add_config(out, "decoder_hidden", c.decoder_hidden);
  add_config(out, "embed", c.embed);
  add_config(out, "streams", static_cast<double>(static_cast<int>(c.streams)));
  for (auto& entry : model.named_parameters()) out.push_back(entry);
  checkpoint_save(out, path);
}

Model load_model(const std::string& path) {
  const NamedParams loaded = checkpoint_load(path);
  const auto cfg = config_entries(loaded);
  ModelConfig c;
  c.num_letters = config_int(cfg, "vocab");
  c.encoder.input_dim = config_int(cfg, "input_dim");
  c.encoder.hidden = config_int(cfg, "hidden");
  c.encoder.blstm_layers = config_int(cfg, "blstm_layers");
  c.encoder.vgg_channels1 = config_int(cfg, "vgg_channels1");
  c.encoder.vgg_channels2 = config_int(cfg, "vgg_channels2");
  c.encoder.vgg_recurrent_layers = config_int(cfg, "vgg_recurrent_layers");
  c.attention_dim = config_int(cfg, "attention_dim");
  c.decoder_hidden = config_int(cfg, "decoder_hidden");
  c.embed = config_int(cfg, "embed");
  const int streams = config_int(cfg, "streams");
  if (streams < 0 || streams > 2) throw CheckpointFormatError(path + ": bad stream mode");
  c.streams = static_cast<StreamMode>(streams);
  Model model = Model::init(c, 0);
  load_into(model.named_parameters(), loaded);
  return model;
}

Model load_model(const std::string& path, const ModelConfig& cfg) {
  Model model = Model::init(cfg, 0);
  load_into(model.named_parameters(), checkpoint_load(path));
  return model;
}

void save_lm(const LanguageModel& lm, const std::string& path) {
  NamedParams out;
  add_config(out, "lm_vocab", lm.config().num_letters);
  add_config(out, "lm_embed", lm.config().embed);
  add_config(out, "lm_hidden", lm.config().hidden);
  for (auto& entry : lm.named_parameters()) out.push_back(entry);
  checkpoint_save(out, path);
}

LanguageModel load_lm(const std::string& path) {
  const NamedParams loaded = checkpoint_load(path);
  const auto cfg = config_entries(loaded);
  LmConfig c{config_int(cfg, "lm_vocab"), config_int(cfg, "lm_embed"), config_int(cfg, "lm_hidden")};
  Rng rng(0);
  LanguageModel lm = LanguageModel::init(c, rng);
  load_into(lm.named_parameters(), loaded);
  return lm;
}

}  // namespace memr
