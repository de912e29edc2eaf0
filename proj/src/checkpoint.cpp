#include "addn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "addn/error.hpp"

namespace addn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'A', 'D', 'D', 'N'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_bytes(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_ += s;
  }
  void put_doubles(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  std::string take() { return std::move(out_); }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointError::Kind::Truncated,
                            std::string("truncated checkpoint: ") + what + " needs " + std::to_string(n) +
                                " bytes at offset " + std::to_string(pos_) + ", " +
                                std::to_string(bytes_.size() - pos_) + " left");
    }
  }
  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_bytes(const char* what) {
    const auto n = get<std::uint64_t>(what);
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> get_doubles(std::uint64_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / sizeof(double)) need(bytes_.size() - pos_ + 1, what);
    std::vector<double> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.out_.append(kMagic, 4);
  w.put<std::uint32_t>(ck.version);
  w.put_bytes(ck.config_text);
  w.put<std::uint64_t>(ck.epoch);
  w.put<std::uint64_t>(ck.tensors.size());
  for (const auto& [name, t] : ck.tensors) {
    w.put_bytes(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.dim()));
    for (std::size_t e : t.shape()) w.put<std::uint64_t>(e);
    w.put_doubles(t.to_vector());
  }
  w.put<std::uint8_t>(ck.adam ? 1 : 0);
  if (ck.adam) {
    w.put<std::uint64_t>(ck.adam->step);
    w.put<std::uint64_t>(ck.adam->m.size());
    for (std::size_t i = 0; i < ck.adam->m.size(); ++i) {
      w.put_doubles(ck.adam->m[i]);
      w.put_doubles(ck.adam->v[i]);
    }
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointError::Kind::BadMagic, "bad magic: not an ADDN checkpoint");
  }
  Reader r(bytes);
  r.get<std::uint32_t>("magic");
  Checkpoint ck;
  ck.version = r.get<std::uint32_t>("format version");
  if (ck.version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "checkpoint format version " + std::to_string(ck.version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  ck.config_text = r.get_bytes("config snapshot");
  ck.epoch = r.get<std::uint64_t>("epoch counter");
  const auto count = r.get<std::uint64_t>("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.get_bytes("tensor name");
    const auto rank = r.get<std::uint32_t>("tensor rank");
    Shape shape(rank);
    for (auto& e : shape) e = r.get<std::uint64_t>("tensor extent");
    const auto n = r.get<std::uint64_t>("tensor length");
    if (n != shape_numel(shape)) {
      throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                            "tensor " + name + " declares shape " + shape_str(shape) + " but holds " +
                                std::to_string(n) + " values");
    }
    ck.tensors.emplace_back(std::move(name), Tensor::from_data(shape, r.get_doubles(n, "tensor values")));
  }
  if (r.get<std::uint8_t>("optimizer flag")) {
    AdamState st;
    st.step = r.get<std::uint64_t>("optimizer step");
    const auto buffers = r.get<std::uint64_t>("optimizer buffer count");
    for (std::uint64_t i = 0; i < buffers; ++i) {
      st.m.push_back(r.get_doubles(r.get<std::uint64_t>("moment length"), "first moment"));
      st.v.push_back(r.get_doubles(r.get<std::uint64_t>("moment length"), "second moment"));
    }
    ck.adam = std::move(st);
  }
  if (!r.done()) {
    throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint has trailing bytes after the last block");
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

Checkpoint make_checkpoint(const ModelParams& params, std::string config_text, std::uint64_t epoch,
                           const AdamState* adam) {
  Checkpoint ck;
  ck.config_text = std::move(config_text);
  ck.epoch = epoch;
  params.for_each([&](const std::string& name, const Tensor& t) { ck.tensors.emplace_back(name, t.clone()); });
  if (adam) ck.adam = *adam;
  return ck;
}

void restore_params(const Checkpoint& ck, ModelParams& params) {
  params.for_each([&](const std::string& name, Tensor& t) {
    const Tensor* found = nullptr;
    for (const auto& [n, v] : ck.tensors) {
      if (n == name) {
        found = &v;
        break;
      }
    }
    if (!found) {
      throw CheckpointError(CheckpointError::Kind::ShapeMismatch, "checkpoint lacks tensor " + name);
    }
    if (found->shape() != t.shape()) {
      throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                            "shape mismatch for " + name + ": checkpoint " + shape_str(found->shape()) +
                                ", model " + shape_str(t.shape()));
    }
    t = found->clone();
  });
}

}  // namespace addn
