#include "adsurv/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <string>

#include "adsurv/io_util.hpp"
#include "json.hpp"

namespace adsurv {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'S', 'V'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

void put_doubles(std::string& out, const Tensor& t) {
  out.append(reinterpret_cast<const char*>(t.data()), t.numel() * sizeof(double));
}

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}

  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    take(&v, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void doubles(Tensor& t) {
    const std::size_t bytes = t.numel() * sizeof(double);
    need(bytes);
    std::memcpy(t.data(), buf_.data() + pos_, bytes);
    pos_ += bytes;
  }
  void raw(void* dst, std::size_t n) { take(dst, n); }
  bool exhausted() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) {
      throw std::runtime_error("truncated checkpoint file");
    }
  }
  void take(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

std::uint8_t mask_bits(const FeatureMask& m) {
  return static_cast<std::uint8_t>((m.text ? 1 : 0) | (m.image ? 2 : 0) |
                                   (m.stats ? 4 : 0) | (m.series ? 8 : 0));
}

FeatureMask mask_from_bits(std::uint8_t b) {
  FeatureMask m;
  m.text = (b & 1) != 0;
  m.image = (b & 2) != 0;
  m.stats = (b & 4) != 0;
  m.series = (b & 8) != 0;
  return m;
}

}  // namespace

void save_checkpoint_binary(const std::filesystem::path& path,
                            const ModelSpec& spec, const ModelState& state) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_string(out, task_mode_name(spec.task));
  out.push_back(static_cast<char>(mask_bits(spec.mask)));
  for (std::uint64_t d :
       {spec.text_dim, spec.image_dim, spec.stat_dim, spec.gender_dim,
        spec.genre_vocab, spec.genre_dim, spec.rnn_input, spec.rnn_hidden}) {
    put_u64(out, d);
  }
  put_u32(out, static_cast<std::uint32_t>(spec.trunk.size()));
  for (std::size_t w : spec.trunk) put_u64(out, w);
  put_u64(out, state.step_count);
  put_u32(out, static_cast<std::uint32_t>(state.params.size()));
  for (const auto& p : state.params) {
    put_string(out, p.name);
    put_u32(out, static_cast<std::uint32_t>(p.value.ndim()));
    for (std::size_t d : p.value.shape()) put_u64(out, d);
    put_doubles(out, p.value);
    put_doubles(out, p.m);
    put_doubles(out, p.v);
  }
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint_binary(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  Reader r(buf);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  Checkpoint ck;
  ck.spec.task = task_mode_from_name(r.str());
  std::uint8_t bits;
  r.raw(&bits, 1);
  ck.spec.mask = mask_from_bits(bits);
  ck.spec.text_dim = r.u64();
  ck.spec.image_dim = r.u64();
  ck.spec.stat_dim = r.u64();
  ck.spec.gender_dim = r.u64();
  ck.spec.genre_vocab = r.u64();
  ck.spec.genre_dim = r.u64();
  ck.spec.rnn_input = r.u64();
  ck.spec.rnn_hidden = r.u64();
  ck.spec.trunk.resize(r.u32());
  for (auto& w : ck.spec.trunk) w = r.u64();
  ck.state.step_count = r.u64();
  const std::uint32_t n_params = r.u32();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    ModelState::Param p;
    p.name = r.str();
    std::vector<std::size_t> shape(r.u32());
    for (auto& d : shape) d = r.u64();
    p.value = Tensor{shape};
    p.m = Tensor{shape};
    p.v = Tensor{shape};
    r.doubles(p.value);
    r.doubles(p.m);
    r.doubles(p.v);
    ck.state.params.push_back(std::move(p));
  }
  if (!r.exhausted()) {
    throw std::runtime_error("trailing bytes in checkpoint file");
  }
  return ck;
}

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
  return nlohmann::json{{"shape", t.shape()}, {"data", t.flat()}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
  return Tensor{j.at("shape").get<std::vector<std::size_t>>(),
                j.at("data").get<std::vector<double>>()};
}

}  // namespace

void save_checkpoint_json(const std::filesystem::path& path,
                          const ModelSpec& spec, const ModelState& state) {
  nlohmann::json j;
  j["schema_version"] = kVersion;
  j["spec"] = {
      {"task", task_mode_name(spec.task)},
      {"mask",
       {{"text", spec.mask.text},
        {"image", spec.mask.image},
        {"stats", spec.mask.stats},
        {"series", spec.mask.series}}},
      {"text_dim", spec.text_dim},
      {"image_dim", spec.image_dim},
      {"stat_dim", spec.stat_dim},
      {"gender_dim", spec.gender_dim},
      {"genre_vocab", spec.genre_vocab},
      {"genre_dim", spec.genre_dim},
      {"rnn_input", spec.rnn_input},
      {"rnn_hidden", spec.rnn_hidden},
      {"trunk", spec.trunk},
  };
  j["step_count"] = state.step_count;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : state.params) {
    params.push_back({{"name", p.name},
                      {"value", tensor_to_json(p.value)},
                      {"m", tensor_to_json(p.m)},
                      {"v", tensor_to_json(p.v)}});
  }
  j["params"] = std::move(params);
  write_file_atomic(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint_json(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  if (j.at("schema_version").get<std::uint32_t>() != kVersion) {
    throw std::runtime_error("unsupported checkpoint schema version");
  }
  Checkpoint ck;
  const auto& s = j.at("spec");
  ck.spec.task = task_mode_from_name(s.at("task").get<std::string>());
  const auto& m = s.at("mask");
  ck.spec.mask.text = m.at("text").get<bool>();
  ck.spec.mask.image = m.at("image").get<bool>();
  ck.spec.mask.stats = m.at("stats").get<bool>();
  ck.spec.mask.series = m.at("series").get<bool>();
  ck.spec.text_dim = s.at("text_dim").get<std::size_t>();
  ck.spec.image_dim = s.at("image_dim").get<std::size_t>();
  ck.spec.stat_dim = s.at("stat_dim").get<std::size_t>();
  ck.spec.gender_dim = s.at("gender_dim").get<std::size_t>();
  ck.spec.genre_vocab = s.at("genre_vocab").get<std::size_t>();
  ck.spec.genre_dim = s.at("genre_dim").get<std::size_t>();
  ck.spec.rnn_input = s.at("rnn_input").get<std::size_t>();
  ck.spec.rnn_hidden = s.at("rnn_hidden").get<std::size_t>();
  ck.spec.trunk = s.at("trunk").get<std::vector<std::size_t>>();
  ck.state.step_count = j.at("step_count").get<std::uint64_t>();
  for (const auto& pj : j.at("params")) {
    ModelState::Param p;
    p.name = pj.at("name").get<std::string>();
    p.value = tensor_from_json(pj.at("value"));
    p.m = tensor_from_json(pj.at("m"));
    p.v = tensor_from_json(pj.at("v"));
    ck.state.params.push_back(std::move(p));
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec,
                     const ModelState& state) {
  if (path.extension() == ".json") {
    save_checkpoint_json(path, spec, state);
  } else {
    save_checkpoint_binary(path, spec, state);
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (path.extension() == ".json") return load_checkpoint_json(path);
  return load_checkpoint_binary(path);
}

}  // namespace adsurv
