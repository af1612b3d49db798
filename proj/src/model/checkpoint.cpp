#include "tweetnews/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tweetnews/error.hpp"

namespace tweetnews::model {

namespace {

constexpr char kMagic[4] = {'s', 'f', 'c', 'k'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kDiscPrefix = "disc.";

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  const std::string& data() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string data, std::string origin) : data_(std::move(data)), origin_(std::move(origin)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& why) const {
    throw DataError("checkpoint " + origin_ + ": " + why + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  const auto& c = ckpt.config;
  for (std::size_t v : {c.n_layers, c.n_heads, c.d_model, c.d_ff, c.max_len, c.vocab_size, c.n_styles}) w.u64(v);
  w.f64(c.dropout_p);
  w.u64(ckpt.blocks.size());
  for (const auto& b : ckpt.blocks) {
    w.u32(static_cast<std::uint32_t>(b.name.size()));
    w.bytes(b.name.data(), b.name.size());
    const auto& shape = b.tensor.shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (auto e : shape) w.u64(e);
    for (double x : b.tensor.data()) w.f64(x);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}), path.string());
  if (r.bytes(4) != std::string(kMagic, 4)) r.fail("bad magic");
  if (auto v = r.u32(); v != kVersion) r.fail("unsupported version " + std::to_string(v));
  Checkpoint ck;
  auto& c = ck.config;
  for (std::size_t* f : {&c.n_layers, &c.n_heads, &c.d_model, &c.d_ff, &c.max_len, &c.vocab_size, &c.n_styles}) {
    *f = r.u64();
  }
  c.dropout_p = r.f64();
  const auto n_blocks = r.u64();
  for (std::uint64_t i = 0; i < n_blocks; ++i) {
    std::string name = r.bytes(r.u32());
    const auto rank = r.u32();
    if (rank > 8) r.fail("implausible rank " + std::to_string(rank));
    numerics::Shape shape(rank);
    for (auto& e : shape) e = r.u64();
    const auto n = numerics::shape_numel(shape);
    if (n > (std::size_t{1} << 40)) r.fail("implausible block size");
    std::vector<double> values(n);
    for (auto& x : values) x = r.f64();
    ck.blocks.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values))});
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return ck;
}

void save_model(const std::filesystem::path& path, const StyleTransferModel& model, const Discriminator* disc) {
  Checkpoint ck{model.config(), model.parameters()};
  if (disc) ck.blocks.insert(ck.blocks.end(), disc->parameters().begin(), disc->parameters().end());
  save_checkpoint(path, ck);
}

StyleTransferModel model_from_checkpoint(const Checkpoint& ckpt) {
  StyleTransferModel model(ckpt.config, 0);
  ParameterList own;
  for (const auto& b : ckpt.blocks) {
    if (b.name.rfind(kDiscPrefix, 0) != 0) own.push_back(b);
  }
  if (own.size() != model.parameters().size()) {
    throw DataError("checkpoint holds " + std::to_string(own.size()) + " model blocks, model expects " +
                    std::to_string(model.parameters().size()));
  }
  model.load_parameters(own);
  return model;
}

std::optional<Discriminator> discriminator_from_checkpoint(const Checkpoint& ckpt) {
  ParameterList disc;
  const Tensor* wz = nullptr;
  for (const auto& b : ckpt.blocks) {
    if (b.name.rfind(kDiscPrefix, 0) == 0) {
      disc.push_back(b);
      if (b.name == "disc.wz") wz = &b.tensor;
    }
  }
  if (disc.empty()) return std::nullopt;
  if (!wz || wz->rank() != 2) throw DataError("checkpoint discriminator lacks disc.wz");
  Discriminator d(wz->dim(0), wz->dim(1), 0);
  d.load_parameters(disc);
  return d;
}

}  // namespace tweetnews::model
