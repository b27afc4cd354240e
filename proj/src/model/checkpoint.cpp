#include "lite/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lite/errors.hpp"

namespace lite {

namespace {

constexpr char kMagic[8] = {'L', 'I', 'T', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Model& model) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.uint<std::uint32_t>(kVersion);
  const std::string header = model.config.to_kv().serialize();
  w.uint<std::uint64_t>(header.size());
  w.bytes(header.data(), header.size());
  const auto named = model.params.named();
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t dim : t->shape) w.uint<std::uint64_t>(dim);
    for (float v : t->data) w.f32(v);
  }
  return w.take();
}

Model decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = r.uint<std::uint64_t>();
  const std::string header = r.str(static_cast<std::size_t>(header_len));

  Model model;
  model.config = ModelConfig::from_kv(io::KvDocument::parse(header, "checkpoint header"));
  model.params.blocks.resize(static_cast<std::size_t>(model.config.n_layers));
  const auto expected = expected_shapes(model.config);
  auto named = model.params.named();

  const auto count = r.uint<std::uint32_t>();
  if (count != named.size()) {
    throw FormatError("checkpoint has " + std::to_string(count) + " blocks, expected " +
                      std::to_string(named.size()));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const std::string name = r.str(r.uint<std::uint32_t>());
    if (name != named[i].first) {
      throw FormatError("checkpoint block '" + name + "' where '" + named[i].first + "' expected");
    }
    Shape shape(r.uint<std::uint32_t>());
    for (auto& dim : shape) dim = static_cast<std::size_t>(r.uint<std::uint64_t>());
    if (shape != expected[i].second) {
      throw FormatError("block '" + name + "' has shape " + shape_str(shape) + ", expected " +
                        shape_str(expected[i].second));
    }
    std::vector<float> data(shape_numel(shape));
    for (float& v : data) v = r.f32();
    *named[i].second = Tensor(std::move(shape), std::move(data));
  }
  if (!r.done()) throw FormatError("trailing bytes after last checkpoint block");
  return model;
}

void save_checkpoint(const std::string& path, const Model& model) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace lite
