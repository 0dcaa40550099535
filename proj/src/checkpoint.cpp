#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rlab/error.hpp"
#include "rlab/network.hpp"

// Layout, all little-endian:
//   "RLAB" | u32 version | u32 L | u32 d | u32 m | u32 o | f64 alpha
//   | u8 scheme | f64 c | L x f64 beta | weights | init weights
// Each weight block is the row-major f64 payload of W_1 .. W_L.

namespace rlab {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[4] = {'R', 'L', 'A', 'B'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void f64(double v) { bytes(&v, 8); }

  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : buf_(b) {}

  void bytes(void* p, std::size_t n) {
    require(n <= buf_.size() - pos_, ErrorKind::FormatError, "checkpoint is truncated");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow(std::size_t v, const char* what) {
  require(v <= 0xFFFFFFFFu, ErrorKind::InvalidParameter, std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

std::vector<Matrix> read_weights(Reader& r, const NetworkConfig& cfg) {
  std::vector<Matrix> w;
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    Matrix m(cfg.fan_out(l), cfg.fan_in(l));
    r.bytes(m.data(), m.size() * sizeof(double));
    require(m.all_finite(), ErrorKind::FormatError, "checkpoint holds non-finite weights");
    w.push_back(std::move(m));
  }
  return w;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
  const NetworkConfig& cfg = net.config();
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(narrow(cfg.depth, "depth"));
  w.u32(narrow(cfg.d, "d"));
  w.u32(narrow(cfg.m, "m"));
  w.u32(narrow(cfg.o, "o"));
  w.f64(cfg.alpha);
  w.u8(static_cast<std::uint8_t>(cfg.scheme));
  w.f64(cfg.c);
  for (double b : cfg.betas) w.f64(b);
  for (const auto& m : net.weights()) w.bytes(m.data(), m.size() * sizeof(double));
  for (const auto& m : net.init_weights()) w.bytes(m.data(), m.size() * sizeof(double));
  return std::move(w.out);
}

Network decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  require(std::memcmp(magic, kMagic, 4) == 0, ErrorKind::FormatError, "not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  require(version == kCheckpointVersion, ErrorKind::FormatError,
          "unsupported checkpoint version " + std::to_string(version));
  NetworkConfig cfg;
  cfg.depth = r.u32();
  cfg.d = r.u32();
  cfg.m = r.u32();
  cfg.o = r.u32();
  cfg.alpha = r.f64();
  const std::uint8_t tag = r.u8();
  require(tag <= static_cast<std::uint8_t>(InitScheme::Custom), ErrorKind::FormatError,
          "unknown scheme tag " + std::to_string(tag));
  cfg.scheme = static_cast<InitScheme>(tag);
  cfg.c = r.f64();
  require(cfg.depth >= 2 && cfg.depth <= 4096, ErrorKind::FormatError, "implausible depth in checkpoint");
  for (std::size_t l = 0; l < cfg.depth; ++l) cfg.betas.push_back(r.f64());
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorKind::FormatError, std::string("checkpoint header: ") + e.what());
  }
  // Reject sizes that cannot be satisfied before allocating.
  std::size_t params = 0;
  for (std::size_t l = 0; l < cfg.depth; ++l) params += cfg.fan_out(l) * cfg.fan_in(l);
  require(params <= bytes.size() / 16, ErrorKind::FormatError, "checkpoint is truncated");
  auto weights = read_weights(r, cfg);
  auto init = read_weights(r, cfg);
  require(r.done(), ErrorKind::FormatError, "checkpoint has trailing bytes");
  return Network(std::move(cfg), std::move(weights), std::move(init));
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "failed writing " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace rlab
