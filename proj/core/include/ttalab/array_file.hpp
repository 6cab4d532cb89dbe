#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ttalab {

// One named array: shape + row-major float64 payload.
struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::uint64_t element_count() const;
};

// Flat container of named float64 arrays, used for model checkpoints, dataset
// samples, and memory-bank dumps. Binary layout (all integers little-endian):
//
//   magic  "TTAB"                      4 bytes
//   u32    format version (= 1)
//   u32    array count
//   per array:
//     u32  name length, then name bytes (UTF-8, no terminator)
//     u32  ndim
//     u64  dims[ndim]
//     f64  data[prod(dims)]            IEEE-754 binary64, little-endian
//
// Round trips are bit-exact: load(save(f)) reproduces every payload bit.
class ArrayFile {
 public:
  void put(std::string name, std::vector<std::uint64_t> dims, std::vector<double> data);
  void put_scalar(std::string name, double value);
  void put_vector(std::string name, std::vector<double> data);

  bool contains(const std::string& name) const;
  const NamedArray& get(const std::string& name) const;
  double get_scalar(const std::string& name) const;

  // Names in insertion order.
  const std::vector<std::string>& names() const { return order_; }
  std::size_t count() const { return order_.size(); }

  void save(const std::string& path) const;
  static ArrayFile load(const std::string& path);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, NamedArray> arrays_;
};

}  // namespace ttalab
