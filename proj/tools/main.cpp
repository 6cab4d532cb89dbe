#include <chrono>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttalab/config.hpp"
#include "ttalab/harness.hpp"
#include "ttalab/nn.hpp"

namespace {

using namespace ttalab;

constexpr const char* kUsage = R"(usage: ttalab <subcommand> [flags]

subcommands:
  gen-data   write a toy tracklet corpus        (--out DIR [--config FILE] [--seed N])
  train      fit the source model on a corpus   (--data DIR --out FILE [--seed N]
                                                 [--epochs N] [--lr X])
  run        score one adaptation cell          (--data DIR --model FILE --method M
                                                 [--mem-init I] [--scenario S] [--gamma X]
                                                 [--batch-size N] [--corruption C]
                                                 [--severity X] [--dynamic-severity]
                                                 [--seed N] [--config FILE] [--out FILE])
  sweep      run a grid of cells from a config  (--config FILE --data DIR --model FILE
                                                 --out FILE [--parallelism N] + run flags
                                                 as grid-wide overrides)
  report     format a sweep CSV                 (--in FILE [--format csv|md-table|svg-lines]
                                                 [--x gamma|batch-size] [--out FILE] + run
                                                 flags as row filters)

seed precedence: --seed, then config, then TTALAB_SEED, then 0.
)";

struct Args {
  std::map<std::string, std::string> flag;
  bool has(const std::string& f) const { return flag.count(f) > 0; }
  const std::string& get(const std::string& f) const { return flag.at(f); }
};

[[noreturn]] void fail(const std::string& msg) {
  std::fprintf(stderr, "ttalab: %s\n", msg.c_str());
  std::exit(1);
}

std::uint64_t parse_u64_arg(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad " + what + ": " + s);
  return v;
}

int parse_int_arg(const std::string& s, const std::string& what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad " + what + ": " + s);
  return v;
}

double parse_double_arg(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad " + what + ": " + s);
  return v;
}

Args parse_args(int argc, char** argv, int from) {
  static const std::set<std::string> known = {
      "--seed",      "--config",     "--out",        "--parallelism",
      "--scenario",  "--gamma",      "--batch-size", "--corruption",
      "--method",    "--mem-init",   "--dynamic-severity",
      "--severity",  "--data",       "--model",      "--epochs",
      "--lr",        "--in",         "--format",     "--x"};
  Args args;
  for (int i = from; i < argc; ++i) {
    const std::string f = argv[i];
    if (known.find(f) == known.end()) fail("unknown flag " + f + " (see ttalab --help)");
    if (f == "--dynamic-severity") {
      // Boolean flag; an explicit true/false value may follow.
      if (i + 1 < argc && (std::string(argv[i + 1]) == "true" ||
                           std::string(argv[i + 1]) == "false")) {
        args.flag[f] = argv[++i];
      } else {
        args.flag[f] = "true";
      }
      continue;
    }
    if (i + 1 >= argc) fail("flag " + f + " needs a value");
    args.flag[f] = argv[++i];
  }
  return args;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("TTALAB_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return parse_u64_arg(v, "TTALAB_SEED");
}

// flag > config > TTALAB_SEED > fallback
std::uint64_t resolve_seed(const Args& args, std::optional<std::uint64_t> config_seed,
                           std::uint64_t fallback) {
  if (args.has("--seed")) return parse_u64_arg(args.get("--seed"), "--seed");
  if (config_seed) return *config_seed;
  if (const auto e = env_seed()) return *e;
  return fallback;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path);
  out << body;
  if (!out.flush()) fail("short write to " + path);
}

int cmd_gen_data(const Args& args) {
  if (!args.has("--out")) fail("gen-data: --out DIR is required");
  ToyDatasetConfig cfg;
  std::optional<std::uint64_t> config_seed;
  if (args.has("--config")) {
    const std::vector<GridSpec> blocks = load_grid_config(args.get("--config"));
    cfg = blocks.front().dataset;
    config_seed = cfg.seed;
  }
  cfg.seed = resolve_seed(args, config_seed, cfg.seed);
  const ToyDataset ds = make_toy_dataset(cfg);
  save_dataset(ds, args.get("--out"));
  std::printf("wrote %s: %d classes, %zu/%zu/%zu train/val/test tracklets, %d frames each\n",
              args.get("--out").c_str(), cfg.classes, ds.train.size(), ds.val.size(),
              ds.test.size(), cfg.frames_per_tracklet);
  return 0;
}

int cmd_train(const Args& args) {
  if (!args.has("--data") || !args.has("--out")) {
    fail("train: --data DIR and --out FILE are required");
  }
  const ToyDataset ds = load_dataset(args.get("--data"));
  const int epochs = args.has("--epochs") ? parse_int_arg(args.get("--epochs"), "--epochs") : 30;
  const double lr = args.has("--lr") ? parse_double_arg(args.get("--lr"), "--lr") : 0.05;
  Rng rng(resolve_seed(args, std::nullopt, 0));
  std::vector<double> losses;
  const Model m = train_source_model(ds, epochs, lr, rng, &losses);
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::printf("epoch %2zu  loss %.6f\n", e + 1, losses[e]);
  }
  std::printf("clean test error %.6f\n", evaluate_error(m, ds.test));
  save_model_file(m, args.get("--out"));
  std::printf("wrote %s\n", args.get("--out").c_str());
  return 0;
}

// Grid-wide flag overrides; `run` funnels through the same path with
// singleton axes so flag semantics match between run and sweep.
void apply_overrides(GridSpec& g, const Args& args) {
  if (args.has("--method")) g.methods = {parse_method(args.get("--method"))};
  if (args.has("--mem-init")) g.mem_inits = {parse_mem_init(args.get("--mem-init"))};
  if (args.has("--scenario")) g.scenarios = {parse_scenario(args.get("--scenario"))};
  if (args.has("--corruption")) g.corruptions = {parse_corruption(args.get("--corruption"))};
  if (args.has("--gamma")) g.gammas = {parse_double_arg(args.get("--gamma"), "--gamma")};
  if (args.has("--batch-size")) {
    g.batch_sizes = {parse_int_arg(args.get("--batch-size"), "--batch-size")};
  }
  if (args.has("--seed")) g.seeds = {parse_u64_arg(args.get("--seed"), "--seed")};
  if (args.has("--severity")) g.severity = parse_double_arg(args.get("--severity"), "--severity");
  if (args.has("--dynamic-severity")) g.dynamic_severity = args.get("--dynamic-severity") == "true";
}

int cmd_run(const Args& args) {
  if (!args.has("--data") || !args.has("--model")) {
    fail("run: --data DIR and --model FILE are required");
  }
  const ToyDataset ds = load_dataset(args.get("--data"));
  const Model m = load_model_file(args.get("--model"));
  GridSpec g;
  if (args.has("--config")) {
    g = load_grid_config(args.get("--config")).front();
  } else {
    g.mem_inits = {MemInit::Empty};
    g.scenarios = {Scenario::TrackletWiseIID};
    g.corruptions = {CorruptionKind::GaussianNoise};
    g.batch_sizes = {64};
    g.seeds = {resolve_seed(args, std::nullopt, 0)};
  }
  g.dataset = ds.config;
  apply_overrides(g, args);
  if (g.methods.empty()) fail("run: --method is required (or a config with methods)");
  validate_grid(g);
  const std::vector<Cell> cells = expand_cells({g});
  if (cells.size() != 1) {
    fail("run: flags select " + std::to_string(cells.size()) +
         " cells, need exactly 1 (use sweep for grids)");
  }
  const std::vector<RunReport> reports = run_grid(m, ds, {g}, 1);
  const std::string csv = reports_to_csv(reports);
  if (args.has("--out")) {
    write_text(args.get("--out"), csv);
  } else {
    std::fputs(csv.c_str(), stdout);
  }
  return reports.front().failed ? 1 : 0;
}

int cmd_sweep(const Args& args) {
  if (!args.has("--config") || !args.has("--data") || !args.has("--model") ||
      !args.has("--out")) {
    fail("sweep: --config FILE, --data DIR, --model FILE and --out FILE are required");
  }
  const ToyDataset ds = load_dataset(args.get("--data"));
  const Model m = load_model_file(args.get("--model"));
  std::vector<GridSpec> blocks = load_grid_config(args.get("--config"));
  for (GridSpec& g : blocks) {
    apply_overrides(g, args);
    const ToyDatasetConfig &a = g.dataset, &b = ds.config;
    if (a.classes != b.classes || a.tracklets_per_class != b.tracklets_per_class ||
        a.frames_per_tracklet != b.frames_per_tracklet || a.drift != b.drift ||
        a.width != b.width || a.height != b.height || a.seed != b.seed) {
      fail("sweep: corpus under --data (classes=" + std::to_string(b.classes) +
           ", seed=" + std::to_string(b.seed) + ") does not match the grid's dataset (classes=" +
           std::to_string(a.classes) + ", seed=" + std::to_string(a.seed) +
           "); regenerate it with matching gen-data flags or set dataset-* keys in the config");
    }
  }
  const int parallelism =
      args.has("--parallelism") ? parse_int_arg(args.get("--parallelism"), "--parallelism") : 1;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<RunReport> reports = run_grid(m, ds, blocks, parallelism);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(args.get("--out"), reports_to_csv(reports));
  int failed = 0;
  for (const RunReport& r : reports) failed += r.failed ? 1 : 0;
  std::printf("wrote %s: %zu cells, %d failed, %.1fs\n", args.get("--out").c_str(),
              reports.size(), failed, secs);
  return 0;
}

int cmd_report(const Args& args) {
  if (!args.has("--in")) fail("report: --in FILE is required");
  std::ifstream in(args.get("--in"), std::ios::binary);
  if (!in) fail("cannot read " + args.get("--in"));
  std::ostringstream buf;
  buf << in.rdbuf();
  std::vector<RunReport> reports = reports_from_csv(buf.str());

  // The axis flags narrow the rows before formatting.
  auto drop_unless = [&reports](auto pred) {
    std::vector<RunReport> kept;
    for (const RunReport& r : reports) {
      if (pred(r)) kept.push_back(r);
    }
    reports.swap(kept);
  };
  if (args.has("--method")) {
    const Method m = parse_method(args.get("--method"));
    drop_unless([m](const RunReport& r) { return r.method == m; });
  }
  if (args.has("--mem-init")) {
    const MemInit i = parse_mem_init(args.get("--mem-init"));
    drop_unless([i](const RunReport& r) { return r.mem_init == i; });
  }
  if (args.has("--scenario")) {
    const Scenario s = parse_scenario(args.get("--scenario"));
    drop_unless([s](const RunReport& r) { return r.scenario == s; });
  }
  if (args.has("--corruption")) {
    const CorruptionKind c = parse_corruption(args.get("--corruption"));
    drop_unless([c](const RunReport& r) { return r.corruption == c; });
  }
  if (args.has("--gamma")) {
    const double gm = parse_double_arg(args.get("--gamma"), "--gamma");
    drop_unless([gm](const RunReport& r) { return r.gamma == gm; });
  }
  if (args.has("--batch-size")) {
    const int b = parse_int_arg(args.get("--batch-size"), "--batch-size");
    drop_unless([b](const RunReport& r) { return r.batch_size == b; });
  }
  if (args.has("--seed")) {
    const std::uint64_t s = parse_u64_arg(args.get("--seed"), "--seed");
    drop_unless([s](const RunReport& r) { return r.seed == s; });
  }
  if (reports.empty()) fail("report: no rows left after filtering");

  const std::string format = args.has("--format") ? args.get("--format") : "md-table";
  std::string body;
  if (format == "csv") {
    body = reports_to_csv(reports);
  } else if (format == "md-table") {
    body = reports_to_md_table(reports);
  } else if (format == "svg-lines") {
    const std::string axis = args.has("--x") ? args.get("--x") : "gamma";
    body = reports_to_svg_lines(reports, axis == "batch-size" ? "batch_size" : axis);
  } else {
    fail("report: unknown --format " + format + " (csv, md-table, svg-lines)");
  }
  if (args.has("--out")) {
    write_text(args.get("--out"), body);
  } else {
    std::fputs(body.c_str(), stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || std::string(argv[1]) == "--help" || std::string(argv[1]) == "-h") {
    std::fputs(kUsage, argc < 2 ? stderr : stdout);
    return argc < 2 ? 2 : 0;
  }
  const std::string cmd = argv[1];
  try {
    const Args args = parse_args(argc, argv, 2);
    if (cmd == "gen-data") return cmd_gen_data(args);
    if (cmd == "train") return cmd_train(args);
    if (cmd == "run") return cmd_run(args);
    if (cmd == "sweep") return cmd_sweep(args);
    if (cmd == "report") return cmd_report(args);
    std::fprintf(stderr, "ttalab: unknown subcommand '%s'\n%s", cmd.c_str(), kUsage);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ttalab %s: %s\n", cmd.c_str(), e.what());
    return 1;
  }
}
