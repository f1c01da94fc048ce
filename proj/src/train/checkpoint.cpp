#include "recnet/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

namespace recnet::train {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'C', 'N', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxRank = 8;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof v);
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void put_raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<char> take() { return std::move(bytes_); }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<char>& bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string get_string(const char* what) {
    const auto n = get<std::uint32_t>(what);
    need(n, what);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) fail(std::string("truncated while reading ") + what);
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& msg) const { throw CheckpointError(origin_ + ": " + msg); }

 private:
  const std::vector<char>& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

std::uint32_t kind_code(recon::ReconKind k) { return static_cast<std::uint32_t>(k); }

}  // namespace

Checkpoint make_checkpoint(const CaptionModel& model, const TrainConfig& config, std::uint64_t epoch,
                           double best_cider) {
  Checkpoint c;
  c.vocab = model.vocab();
  c.config = config;
  c.feature_dim = model.spec().dims.feature;
  c.reconstructor = model.recon_kind();
  c.epoch = epoch;
  c.best_cider = best_cider;
  for (const auto& p : model.params()) {
    c.params.push_back({p.name, p.tensor.shape(), {p.tensor.values().begin(), p.tensor.values().end()}});
  }
  return c;
}

std::vector<char> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.put_raw(kMagic.data(), kMagic.size());
  w.put(kVersion);
  const auto words = ckpt.vocab.words();
  w.put(static_cast<std::uint32_t>(words.size()));
  for (const auto& word : words) w.put_string(word);
  w.put_string(ckpt.config.to_text());
  w.put(static_cast<std::uint32_t>(ckpt.feature_dim));
  w.put(kind_code(ckpt.reconstructor));
  w.put(ckpt.epoch);
  w.put(ckpt.best_cider);
  w.put(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& rec : ckpt.params) {
    if (ad::shape_size(rec.shape) != rec.values.size()) {
      throw CheckpointError("parameter " + rec.name + " has " + std::to_string(rec.values.size()) +
                            " values for shape " + ad::shape_string(rec.shape));
    }
    w.put_string(rec.name);
    w.put(static_cast<std::uint32_t>(rec.shape.size()));
    for (auto extent : rec.shape) w.put(static_cast<std::uint64_t>(extent));
    w.put_raw(reinterpret_cast<const char*>(rec.values.data()), rec.values.size() * sizeof(double));
  }
  return w.take();
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint parse_checkpoint(const std::vector<char>& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  r.need(kMagic.size(), "magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) r.fail("missing RCNC magic");
  r.get<std::array<char, 4>>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));

  Checkpoint c;
  const auto nwords = r.get<std::uint32_t>("vocabulary size");
  std::vector<std::string> words;
  words.reserve(std::min<std::size_t>(nwords, bytes.size()));
  for (std::uint32_t i = 0; i < nwords; ++i) words.push_back(r.get_string("vocabulary word"));
  try {
    c.vocab = data::Vocabulary::from_words(words);
    c.config = parse_config(r.get_string("config"));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    r.fail(std::string("bad metadata: ") + e.what());
  }
  c.feature_dim = r.get<std::uint32_t>("feature dim");
  const auto kind = r.get<std::uint32_t>("reconstructor kind");
  if (kind > kind_code(recon::ReconKind::joint)) r.fail("bad reconstructor kind " + std::to_string(kind));
  c.reconstructor = static_cast<recon::ReconKind>(kind);
  c.epoch = r.get<std::uint64_t>("epoch");
  c.best_cider = r.get<double>("best cider");

  const auto nparams = r.get<std::uint32_t>("parameter count");
  for (std::uint32_t i = 0; i < nparams; ++i) {
    ParamRecord rec;
    rec.name = r.get_string("parameter name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank == 0 || rank > kMaxRank) r.fail("parameter " + rec.name + " has bad rank " + std::to_string(rank));
    std::size_t count = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto extent = r.get<std::uint64_t>("extent");
      if (extent == 0 || extent > bytes.size()) r.fail("parameter " + rec.name + " has bad extent");
      rec.shape.push_back(static_cast<std::size_t>(extent));
      count *= static_cast<std::size_t>(extent);
    }
    if (count > bytes.size() / sizeof(double)) r.fail("parameter " + rec.name + " is larger than the file");
    rec.values.resize(count);
    for (auto& v : rec.values) v = r.get<double>("parameter values");
    c.params.push_back(std::move(rec));
  }
  if (!r.at_end()) r.fail("trailing bytes after parameter records");
  return c;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes, path.string());
}

void load_parameters(CaptionModel& model, const std::vector<ParamRecord>& records) {
  auto& ps = model.params();
  if (records.size() != ps.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(records.size()) + " parameters, model expects " +
                          std::to_string(ps.size()));
  }
  std::set<std::string> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.name).second) throw CheckpointError("duplicate parameter " + rec.name);
    const auto* p = ps.find(rec.name);
    if (!p) throw CheckpointError("unexpected parameter " + rec.name);
    if (p->tensor.shape() != rec.shape) {
      throw CheckpointError("parameter " + rec.name + ": checkpoint shape " + ad::shape_string(rec.shape) +
                            ", model shape " + ad::shape_string(p->tensor.shape()));
    }
  }
  for (const auto& rec : records) {
    auto dst = ps.at(rec.name).mutable_values();
    std::copy(rec.values.begin(), rec.values.end(), dst.begin());
  }
}

CaptionModel load_model(const Checkpoint& ckpt) {
  if (ckpt.feature_dim == 0) throw CheckpointError("checkpoint has zero feature dimension");
  CaptionModel model(ckpt.vocab, model_spec(ckpt.config, ckpt.vocab.size(), ckpt.feature_dim), ckpt.config.seed);
  model.attach_reconstructor(ckpt.reconstructor);
  load_parameters(model, ckpt.params);
  return model;
}

}  // namespace recnet::train
