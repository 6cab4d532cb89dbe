#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ttalab/harness.hpp"

namespace ttalab {
namespace {

constexpr const char* kCsvHeader =
    "method,mem_init,scenario,corruption,gamma,batch_size,seed,error_rate,n_samples,status";

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) { return fmt(static_cast<std::uint64_t>(static_cast<unsigned>(v))); }

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv: bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv: bad integer '" + s + "'");
  }
  return v;
}

// Error messages land in one CSV field: strip the delimiter and newlines.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t from = 0;
  for (;;) {
    const std::size_t at = line.find(sep, from);
    if (at == std::string::npos) {
      out.push_back(line.substr(from));
      return out;
    }
    out.push_back(line.substr(from, at - from));
    from = at + 1;
  }
}

// Table 4 column families over the corruption kinds.
const char* corruption_group(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::GaussianNoise:
    case CorruptionKind::ShotNoise:
    case CorruptionKind::ImpulseNoise:
      return "Noise";
    case CorruptionKind::DefocusBlur:
    case CorruptionKind::GlassBlur:
    case CorruptionKind::ZoomBlur:
    case CorruptionKind::MotionBlur:
      return "Blur";
    case CorruptionKind::Snow:
    case CorruptionKind::Frost:
    case CorruptionKind::Fog:
    case CorruptionKind::Brightness:
      return "Weather";
    case CorruptionKind::Contrast:
    case CorruptionKind::ElasticTransform:
    case CorruptionKind::Pixelate:
    case CorruptionKind::JpegLike:
      return "Digital";
  }
  throw std::logic_error("unreachable");
}

int group_rank(CorruptionKind k) {
  const std::string g = corruption_group(k);
  if (g == "Noise") return 0;
  if (g == "Blur") return 1;
  if (g == "Weather") return 2;
  return 3;
}

}  // namespace

std::string reports_to_csv(const std::vector<RunReport>& reports) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const RunReport& r : reports) {
    out += method_name(r.method);
    out += ',';
    out += mem_init_name(r.mem_init);
    out += ',';
    out += scenario_name(r.scenario);
    out += ',';
    out += corruption_name(r.corruption);
    out += ',';
    out += fmt(r.gamma);
    out += ',';
    out += fmt(r.batch_size);
    out += ',';
    out += fmt(r.seed);
    out += ',';
    out += fmt(r.error_rate);
    out += ',';
    out += fmt(r.n_samples);
    out += ',';
    out += r.failed ? sanitize(r.error) : std::string("ok");
    out += '\n';
  }
  return out;
}

std::vector<RunReport> reports_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("csv: missing or unknown header");
  }
  std::vector<RunReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 10) throw std::invalid_argument("csv: wrong field count: " + line);
    RunReport r;
    r.method = parse_method(f[0]);
    r.mem_init = parse_mem_init(f[1]);
    r.scenario = parse_scenario(f[2]);
    r.corruption = parse_corruption(f[3]);
    r.gamma = parse_double(f[4]);
    r.batch_size = static_cast<int>(parse_u64(f[5]));
    r.seed = parse_u64(f[6]);
    r.error_rate = parse_double(f[7]);
    r.n_samples = static_cast<int>(parse_u64(f[8]));
    r.failed = f[9] != "ok";
    if (r.failed) r.error = f[9];
    out.push_back(r);
  }
  return out;
}

std::string reports_to_md_table(const std::vector<RunReport>& reports) {
  std::vector<RunReport> ok;
  for (const RunReport& r : reports) {
    if (!r.failed) ok.push_back(r);
  }
  if (ok.empty()) throw std::invalid_argument("md-table: no successful reports");
  for (const RunReport& r : ok) {
    if (r.scenario != ok.front().scenario || r.batch_size != ok.front().batch_size ||
        r.gamma != ok.front().gamma) {
      throw std::invalid_argument("md-table: mixed scenario, batch size, or gamma axes");
    }
  }

  std::vector<CorruptionKind> kinds;
  for (const RunReport& r : ok) {
    if (std::find(kinds.begin(), kinds.end(), r.corruption) == kinds.end()) {
      kinds.push_back(r.corruption);
    }
  }
  std::sort(kinds.begin(), kinds.end(), [](CorruptionKind a, CorruptionKind b) {
    return std::make_tuple(group_rank(a), static_cast<int>(a)) <
           std::make_tuple(group_rank(b), static_cast<int>(b));
  });

  // Per-(method, mem_init, corruption) error samples, one per seed.
  std::map<std::tuple<int, int, int>, std::vector<double>> acc;
  std::vector<std::pair<Method, MemInit>> rows;
  for (const RunReport& r : ok) {
    const auto key = std::make_tuple(static_cast<int>(r.method), static_cast<int>(r.mem_init),
                                     static_cast<int>(r.corruption));
    acc[key].push_back(r.error_rate);
    const auto row = std::make_pair(r.method, r.mem_init);
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(static_cast<int>(a.first), static_cast<int>(a.second)) <
           std::make_tuple(static_cast<int>(b.first), static_cast<int>(b.second));
  });

  std::string out;
  out += "Columns: ";
  const char* last_group = "";
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const char* g = corruption_group(kinds[i]);
    if (std::string(g) != last_group) {
      if (i > 0) out += " · ";
      out += "**";
      out += g;
      out += "**: ";
      last_group = g;
    } else {
      out += ", ";
    }
    out += corruption_name(kinds[i]);
  }
  out += "\n\n| method | mem_init |";
  for (CorruptionKind k : kinds) {
    out += ' ';
    out += corruption_name(k);
    out += " |";
  }
  out += " Avg |\n|---|---|";
  for (std::size_t i = 0; i < kinds.size() + 1; ++i) out += "---|";
  out += '\n';

  for (const auto& [m, init] : rows) {
    out += "| ";
    out += method_name(m);
    out += " | ";
    out += mem_init_name(init);
    out += " |";
    double total = 0.0;
    int found = 0;
    for (CorruptionKind k : kinds) {
      const auto it = acc.find(std::make_tuple(static_cast<int>(m), static_cast<int>(init),
                                               static_cast<int>(k)));
      out += ' ';
      if (it == acc.end()) {
        out += "-";
      } else {
        const std::vector<double>& e = it->second;
        double mean = 0.0;
        for (double v : e) mean += v;
        mean /= e.size();
        total += mean;
        ++found;
        out += fmt(mean);
        if (e.size() > 1) {
          double ss = 0.0;
          for (double v : e) ss += (v - mean) * (v - mean);
          out += " ± ";
          out += fmt(std::sqrt(ss / (e.size() - 1)));
        }
      }
      out += " |";
    }
    out += ' ';
    out += found > 0 ? fmt(total / found) : std::string("-");
    out += " |\n";
  }
  return out;
}

std::string reports_to_svg_lines(const std::vector<RunReport>& reports,
                                 const std::string& x_axis) {
  const bool by_gamma = x_axis == "gamma";
  if (!by_gamma && x_axis != "batch_size") {
    throw std::invalid_argument("svg-lines: x_axis must be gamma or batch_size");
  }
  std::vector<RunReport> ok;
  for (const RunReport& r : reports) {
    if (!r.failed) ok.push_back(r);
  }
  if (ok.empty()) throw std::invalid_argument("svg-lines: no successful reports");

  // Mean error over seeds and corruptions per (method, mem_init, x).
  std::map<std::tuple<int, int, double>, std::pair<double, int>> acc;
  std::vector<std::pair<Method, MemInit>> series;
  std::vector<double> xs;
  for (const RunReport& r : ok) {
    const double x = by_gamma ? r.gamma : static_cast<double>(r.batch_size);
    if (by_gamma && !(x > 0.0)) {
      throw std::invalid_argument("svg-lines: gamma axis needs positive gammas");
    }
    auto& slot = acc[std::make_tuple(static_cast<int>(r.method),
                                     static_cast<int>(r.mem_init), x)];
    slot.first += r.error_rate;
    slot.second += 1;
    const auto s = std::make_pair(r.method, r.mem_init);
    if (std::find(series.begin(), series.end(), s) == series.end()) series.push_back(s);
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(static_cast<int>(a.first), static_cast<int>(a.second)) <
           std::make_tuple(static_cast<int>(b.first), static_cast<int>(b.second));
  });

  const double width = 640.0, height = 400.0;
  const double left = 70.0, right = width - 180.0, top = 30.0, bottom = height - 50.0;
  auto x_pos = [&](double x) {
    const double v = by_gamma ? std::log10(x) : x;
    const double lo = by_gamma ? std::log10(xs.front()) : xs.front();
    const double hi = by_gamma ? std::log10(xs.back()) : xs.back();
    if (hi == lo) return (left + right) / 2.0;
    return left + (right - left) * (v - lo) / (hi - lo);
  };
  auto y_pos = [&](double err) { return bottom - (bottom - top) * err; };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y_pos(tick) + 4
        << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(tick) << "</text>\n";
  }
  for (double x : xs) {
    svg << "<text x=\"" << x_pos(x) << "\" y=\"" << bottom + 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt(x) << "</text>\n";
  }
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << (by_gamma ? "gamma (log scale)" : "batch size")
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (top + bottom) / 2 << ")\">error rate</text>\n";

  int color = 0;
  for (const auto& [m, init] : series) {
    std::ostringstream points;
    bool any = false;
    for (double x : xs) {
      const auto it = acc.find(std::make_tuple(static_cast<int>(m), static_cast<int>(init), x));
      if (it == acc.end()) continue;
      const double err = it->second.first / it->second.second;
      if (any) points << ' ';
      points << fmt(x_pos(x)) << ',' << fmt(y_pos(err));
      any = true;
    }
    if (!any) continue;
    const char* stroke = kPalette[color % 10];
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\""
        << points.str() << "\"/>\n";
    svg << "<text x=\"" << right + 10 << "\" y=\"" << top + 16 * color + 4
        << "\" font-size=\"12\" fill=\"" << stroke << "\">" << method_name(m) << " / "
        << mem_init_name(init) << "</text>\n";
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ttalab
