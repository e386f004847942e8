#include "landseg/swin/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace landseg::nn {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw DataError("checkpoint is truncated");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SwinConfig& config, const ParamStore<float>& params) {
  std::string out(kCheckpointMagic);
  std::string header;
  for (const auto& [k, v] : config.to_map()) header += k + "=" + v + "\n";
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.all()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    put_u32(out, static_cast<std::uint32_t>(p.value.rank()));
    for (int d : p.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : p.value.storage()) put_f32(out, v);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write checkpoint '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::stringstream buffer;
  buffer << f.rdbuf();
  Reader r(buffer.str());
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw DataError("'" + path.string() + "' is not a SWSEG1 checkpoint");
  }
  const std::string header = r.bytes(r.u32());
  std::map<std::string, std::string> values;
  std::istringstream hs(header);
  for (std::string line; std::getline(hs, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed checkpoint header line '" + line + "'");
    values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  Checkpoint ck;
  ck.config = SwinConfig::from_map(values);
  const std::uint32_t count = r.u32();
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) throw DataError("checkpoint tensor '" + name + "' has invalid rank");
    Shape shape(rank);
    for (auto& d : shape) {
      d = static_cast<int>(r.u32());
      if (d <= 0) throw DataError("checkpoint tensor '" + name + "' has an empty dimension");
    }
    std::vector<float> data(shape_size(shape));
    for (auto& v : data) v = r.f32();
    const bool no_decay = name.find("norm") != std::string::npos ||
                          name.find("relative_position_bias_table") != std::string::npos;
    ck.params.add(std::move(name), Tensor(std::move(shape), std::move(data)), no_decay ? 0.0 : 1.0);
  }
  if (!r.done()) throw DataError("trailing bytes in checkpoint '" + path.string() + "'");
  return ck;
}

}  // namespace landseg::nn
