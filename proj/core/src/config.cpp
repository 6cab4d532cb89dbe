#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ttalab/config.hpp"

namespace ttalab {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t from = 0;
  for (;;) {
    const std::size_t at = value.find(',', from);
    const std::string item = trim(value.substr(from, at - from));
    if (item.empty()) throw std::invalid_argument("config: empty list item in '" + value + "'");
    out.push_back(item);
    if (at == std::string::npos) return out;
    from = at + 1;
  }
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("config: bad number '" + s + "'");
  }
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("config: bad integer '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("config: bad seed '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("config: bad bool '" + s + "' (want true or false)");
}

void apply_key(GridSpec& g, const std::string& key, const std::string& value) {
  if (key == "methods") {
    g.methods.clear();
    for (const auto& s : split_list(value)) g.methods.push_back(parse_method(s));
  } else if (key == "mem-inits") {
    g.mem_inits.clear();
    for (const auto& s : split_list(value)) g.mem_inits.push_back(parse_mem_init(s));
  } else if (key == "scenarios") {
    g.scenarios.clear();
    for (const auto& s : split_list(value)) g.scenarios.push_back(parse_scenario(s));
  } else if (key == "corruptions") {
    g.corruptions.clear();
    for (const auto& s : split_list(value)) g.corruptions.push_back(parse_corruption(s));
  } else if (key == "gammas") {
    g.gammas.clear();
    for (const auto& s : split_list(value)) g.gammas.push_back(to_double(s));
  } else if (key == "batch-sizes") {
    g.batch_sizes.clear();
    for (const auto& s : split_list(value)) g.batch_sizes.push_back(to_int(s));
  } else if (key == "seeds") {
    g.seeds.clear();
    for (const auto& s : split_list(value)) g.seeds.push_back(to_u64(s));
  } else if (key == "severity") {
    g.severity = to_double(value);
  } else if (key == "dynamic-severity") {
    g.dynamic_severity = to_bool(value);
  } else if (key == "lr") {
    g.hyper.lr = to_double(value);
  } else if (key == "memory-capacity") {
    g.hyper.memory_capacity = to_int(value);
  } else if (key == "ema-decay") {
    g.hyper.ema_decay = to_double(value);
  } else if (key == "bn-blend") {
    g.hyper.bn_blend = to_double(value);
  } else if (key == "adapt-on-input") {
    g.hyper.adapt_on_input = to_bool(value);
  } else if (key == "dataset-classes") {
    g.dataset.classes = to_int(value);
  } else if (key == "dataset-tracklets-per-class") {
    g.dataset.tracklets_per_class = to_int(value);
  } else if (key == "dataset-frames-per-tracklet") {
    g.dataset.frames_per_tracklet = to_int(value);
  } else if (key == "dataset-drift") {
    g.dataset.drift = to_double(value);
  } else if (key == "dataset-width") {
    g.dataset.width = to_int(value);
  } else if (key == "dataset-height") {
    g.dataset.height = to_int(value);
  } else if (key == "dataset-seed") {
    g.dataset.seed = to_u64(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

}  // namespace

std::vector<GridSpec> parse_grid_config(const std::string& text) {
  std::vector<GridSpec> blocks;
  bool open = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line == "[grid]") {
      blocks.emplace_back();
      open = true;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key = value: '" + line + "'");
    }
    if (!open) {
      blocks.emplace_back();
      open = true;
    }
    apply_key(blocks.back(), trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (blocks.empty()) throw std::invalid_argument("config: no grid blocks");
  for (const GridSpec& g : blocks) validate_grid(g);
  return blocks;
}

std::vector<GridSpec> load_grid_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid_config(buf.str());
}

}  // namespace ttalab
