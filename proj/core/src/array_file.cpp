#include "ttalab/array_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ttalab {
namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("array file: truncated u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("array file: truncated u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double d) {
  write_u64(os, std::bit_cast<std::uint64_t>(d));
}

double read_f64(std::istream& is) {
  return std::bit_cast<double>(read_u64(is));
}

constexpr char kMagic[4] = {'T', 'T', 'A', 'B'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::uint64_t NamedArray::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  return n;
}

void ArrayFile::put(std::string name, std::vector<std::uint64_t> dims, std::vector<double> data) {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  if (n != data.size()) throw std::invalid_argument("ArrayFile::put: shape/data size mismatch for " + name);
  if (!arrays_.contains(name)) order_.push_back(name);
  arrays_[name] = NamedArray{name, std::move(dims), std::move(data)};
}

void ArrayFile::put_scalar(std::string name, double value) {
  put(std::move(name), {1}, {value});
}

void ArrayFile::put_vector(std::string name, std::vector<double> data) {
  const std::uint64_t n = data.size();
  put(std::move(name), {n}, std::move(data));
}

bool ArrayFile::contains(const std::string& name) const { return arrays_.contains(name); }

const NamedArray& ArrayFile::get(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw std::out_of_range("ArrayFile: missing array " + name);
  return it->second;
}

double ArrayFile::get_scalar(const std::string& name) const {
  const NamedArray& a = get(name);
  if (a.data.size() != 1) throw std::runtime_error("ArrayFile: " + name + " is not a scalar");
  return a.data[0];
}

void ArrayFile::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("array file: cannot open for write: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(order_.size()));
  for (const std::string& name : order_) {
    const NamedArray& a = arrays_.at(name);
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(a.dims.size()));
    for (std::uint64_t d : a.dims) write_u64(os, d);
    for (double v : a.data) write_f64(os, v);
  }
  if (!os) throw std::runtime_error("array file: write failed: " + path);
}

ArrayFile ArrayFile::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("array file: cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("array file: bad magic: " + path);
  const std::uint32_t version = read_u32(is);
  if (version != kVersion) throw std::runtime_error("array file: unsupported version");
  const std::uint32_t count = read_u32(is);
  ArrayFile f;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::runtime_error("array file: truncated name");
    const std::uint32_t ndim = read_u32(is);
    std::vector<std::uint64_t> dims(ndim);
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      dims[d] = read_u64(is);
      n *= dims[d];
    }
    std::vector<double> data(n);
    for (std::uint64_t k = 0; k < n; ++k) data[k] = read_f64(is);
    f.put(std::move(name), std::move(dims), std::move(data));
  }
  return f;
}

}  // namespace ttalab
