#include "cogrelay/qtable_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cogrelay/io.hpp"

namespace cogrelay {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'Q', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_f64(std::vector<unsigned char>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error("q-table artifact truncated");
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> serialize_qtable(const QTable& table,
                                            const LevelScheme& scheme,
                                            const ActionMask& mask) {
  std::vector<unsigned char> out;
  out.reserve(64 + table.n_states() * kNumActions * 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(scheme.n_levels()));
  put_u32(out, static_cast<std::uint32_t>(scheme.thresholds().size()));
  for (int v : scheme.thresholds()) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_u32(out, mask.bits());
  put_f64(out, table.alpha());
  put_f64(out, table.gamma());
  put_u64(out, table.n_states());
  put_u32(out, kNumActions);
  for (double v : table.values()) put_f64(out, v);
  return out;
}

QTableArtifact deserialize_qtable(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("not a q-table artifact (bad magic)");
  }
  Reader r(bytes);
  r.u32();  // magic, already checked
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("unsupported q-table format version " +
                             std::to_string(version));
  }
  const std::uint32_t n_levels = r.u32();
  const std::uint32_t n_thresholds = r.u32();
  std::vector<int> thresholds(n_thresholds);
  for (auto& v : thresholds) v = static_cast<int>(r.u32());
  LevelScheme scheme(static_cast<int>(n_levels), std::move(thresholds));

  const ActionMask mask = ActionMask::from_bits(r.u32());
  if (mask.count() == 0) {
    throw std::runtime_error("q-table artifact has an empty action mask");
  }
  const double alpha = r.f64();
  const double gamma = r.f64();
  const std::uint64_t n_states = r.u64();
  if (n_states != scheme.state_count()) {
    throw std::runtime_error(
        "q-table artifact state count does not match its level scheme");
  }
  const std::uint32_t n_actions = r.u32();
  if (n_actions != kNumActions) {
    throw std::runtime_error("q-table artifact has the wrong action count");
  }

  QTable table(n_states, alpha, gamma);
  for (auto& v : table.values()) v = r.f64();
  if (!r.done()) {
    throw std::runtime_error("q-table artifact has trailing bytes");
  }
  return QTableArtifact{std::move(scheme), mask, std::move(table)};
}

void save_qtable(const std::string& path, const QTable& table,
                 const LevelScheme& scheme, const ActionMask& mask) {
  const std::vector<unsigned char> bytes =
      serialize_qtable(table, scheme, mask);
  atomic_write(path,
               std::string(reinterpret_cast<const char*>(bytes.data()),
                           bytes.size()));
}

QTableArtifact load_qtable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return deserialize_qtable(bytes);
}

}  // namespace cogrelay
