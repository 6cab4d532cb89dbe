#include "ttalab/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ttalab/array_file.hpp"

namespace ttalab {
namespace {

struct SplitSizes {
  int train;
  int val;
  int test;
};

// 50/30/20 with every split non-empty.
SplitSizes split_sizes(int n) {
  SplitSizes s;
  s.train = std::max(1, n / 2);
  s.val = std::max(1, n * 3 / 10);
  s.test = n - s.train - s.val;
  if (s.test < 1) throw std::invalid_argument("dataset: too few tracklets per class to split");
  return s;
}

}  // namespace

void validate_dataset_config(const ToyDatasetConfig& c) {
  if (c.classes < 2 || c.classes > kPatternClasses) {
    throw std::invalid_argument("dataset: classes must be in [2, 21]");
  }
  if (c.tracklets_per_class < 3) {
    throw std::invalid_argument("dataset: need >= 3 tracklets per class");
  }
  if (c.frames_per_tracklet < 1) throw std::invalid_argument("dataset: empty tracklets");
  if (c.drift < 0.0) throw std::invalid_argument("dataset: negative drift");
  if (c.width < 2 || c.height < 2) throw std::invalid_argument("dataset: image too small");
  split_sizes(c.tracklets_per_class);
}

ToyDataset make_toy_dataset(const ToyDatasetConfig& config) {
  validate_dataset_config(config);
  const SplitSizes sizes = split_sizes(config.tracklets_per_class);
  ToyDataset ds;
  ds.config = config;
  int next_id = 0;
  for (int cls = 0; cls < config.classes; ++cls) {
    for (int i = 0; i < config.tracklets_per_class; ++i) {
      Rng rng = Rng::from(config.seed, static_cast<std::uint64_t>(cls),
                          static_cast<std::uint64_t>(i));
      Tracklet t = synth_tracklet(cls, config.frames_per_tracklet, config.drift, rng,
                                  config.width, config.height);
      t.id = next_id++;
      if (i < sizes.train) {
        ds.train.push_back(std::move(t));
      } else if (i < sizes.train + sizes.val) {
        ds.val.push_back(std::move(t));
      } else {
        ds.test.push_back(std::move(t));
      }
    }
  }
  return ds;
}

namespace {

constexpr const char* kSplitNames[3] = {"train", "val", "test"};

const std::vector<Tracklet>& split_of(const ToyDataset& ds, int i) {
  return i == 0 ? ds.train : i == 1 ? ds.val : ds.test;
}

std::vector<Tracklet>& split_of(ToyDataset& ds, int i) {
  return i == 0 ? ds.train : i == 1 ? ds.val : ds.test;
}

}  // namespace

void save_dataset(const ToyDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream m;
  m << "# toy-ITD dataset manifest\n";
  m << "# tracklet <id> <class> <split> <frame_count> <corruption_seed>\n";
  m << "version 1\n";
  m << "classes " << ds.config.classes << "\n";
  m << "tracklets_per_class " << ds.config.tracklets_per_class << "\n";
  m << "frames_per_tracklet " << ds.config.frames_per_tracklet << "\n";
  char drift[40];
  std::snprintf(drift, sizeof(drift), "%.17g", ds.config.drift);
  m << "drift " << drift << "\n";
  m << "image " << ds.config.width << " " << ds.config.height << "\n";
  m << "seed " << ds.config.seed << "\n";

  ArrayFile frames;
  std::size_t total = 0;
  for (int s = 0; s < 3; ++s) {
    for (const Tracklet& t : split_of(ds, s)) total += t.frames.size();
  }
  const std::size_t dim = static_cast<std::size_t>(ds.config.width) * ds.config.height;
  std::vector<double> flat;
  flat.reserve(total * dim);
  for (int s = 0; s < 3; ++s) {
    for (const Tracklet& t : split_of(ds, s)) {
      validate_tracklet(t);
      m << "tracklet " << t.id << " " << t.label << " " << kSplitNames[s] << " "
        << t.frames.size() << " " << t.corruption_seed << "\n";
      for (const Image& f : t.frames) flat.insert(flat.end(), f.data(), f.data() + f.size());
    }
  }
  frames.put("frames", {static_cast<std::uint64_t>(total), static_cast<std::uint64_t>(dim)},
             std::move(flat));
  frames.save(dir + "/frames.ttab");

  std::ofstream out(dir + "/manifest.txt", std::ios::binary);
  if (!out.good()) throw std::runtime_error("save_dataset: cannot write manifest");
  out << m.str();
}

ToyDataset load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.txt");
  if (!in.good()) throw std::runtime_error("load_dataset: cannot open manifest in " + dir);
  ToyDataset ds;
  struct Record {
    int id;
    int cls;
    int split;
    std::size_t count;
    std::uint64_t seed;
  };
  std::vector<Record> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "version") {
      int v;
      ls >> v;
      if (v != 1) throw std::runtime_error("load_dataset: unsupported manifest version");
    } else if (key == "classes") {
      ls >> ds.config.classes;
    } else if (key == "tracklets_per_class") {
      ls >> ds.config.tracklets_per_class;
    } else if (key == "frames_per_tracklet") {
      ls >> ds.config.frames_per_tracklet;
    } else if (key == "drift") {
      ls >> ds.config.drift;
    } else if (key == "image") {
      ls >> ds.config.width >> ds.config.height;
    } else if (key == "seed") {
      ls >> ds.config.seed;
    } else if (key == "tracklet") {
      Record r;
      std::string split;
      ls >> r.id >> r.cls >> split >> r.count >> r.seed;
      if (!ls) throw std::runtime_error("load_dataset: bad tracklet line: " + line);
      r.split = split == "train" ? 0 : split == "val" ? 1 : split == "test" ? 2 : -1;
      if (r.split < 0) throw std::runtime_error("load_dataset: bad split name: " + split);
      records.push_back(r);
    } else {
      throw std::runtime_error("load_dataset: unknown manifest key: " + key);
    }
  }

  ArrayFile frames = ArrayFile::load(dir + "/frames.ttab");
  const NamedArray& arr = frames.get("frames");
  if (arr.dims.size() != 2) throw std::runtime_error("load_dataset: frames array must be 2-d");
  const std::size_t dim = static_cast<std::size_t>(ds.config.width) * ds.config.height;
  if (arr.dims[1] != dim) throw std::runtime_error("load_dataset: frame dim mismatch");
  std::size_t total = 0;
  for (const Record& r : records) total += r.count;
  if (arr.dims[0] != total) throw std::runtime_error("load_dataset: frame count mismatch");

  std::size_t offset = 0;
  for (const Record& r : records) {
    Tracklet t;
    t.id = r.id;
    t.label = r.cls;
    t.corruption_seed = r.seed;
    for (std::size_t f = 0; f < r.count; ++f) {
      Image img(ds.config.width, ds.config.height);
      const double* src = arr.data.data() + (offset + f) * dim;
      std::copy(src, src + dim, img.data());
      t.frames.push_back(std::move(img));
    }
    offset += r.count;
    validate_tracklet(t);
    split_of(ds, r.split).push_back(std::move(t));
  }
  if (ds.test.empty() || ds.train.empty() || ds.val.empty()) {
    throw std::runtime_error("load_dataset: a split is empty");
  }
  return ds;
}

}  // namespace ttalab
