#include "geoscope/chart.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "geoscope/error.hpp"

namespace geoscope {

Chart::Chart(std::vector<std::string> coords, std::vector<Expr> upper_metric,
             std::vector<std::optional<Interval>> domain)
    : coords_(std::move(coords)), domain_(std::move(domain)) {
  const int n = dim();
  if (n < 1) throw ShapeError("chart needs at least one coordinate");
  if (static_cast<int>(upper_metric.size()) != n * n) {
    throw ShapeError("metric must have dim*dim entries");
  }
  if (domain_.empty()) domain_.resize(n);
  if (static_cast<int>(domain_.size()) != n) throw ShapeError("one domain hint slot per coordinate");
  metric_.resize(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Expr e = upper_metric[i * n + j];
      if (e.empty()) e = Expr::number(0.0);
      metric_[i * n + j] = e;
      metric_[j * n + i] = e;
    }
  }
}

bool Chart::in_domain(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(point[i])) return false;
    if (domain_[i] && !domain_[i]->contains(point[i])) return false;
  }
  return true;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool valid_identifier(const std::string& name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

struct Line {
  int number;
  std::size_t offset;  // of the line in the file
  std::string key;     // left of '='
  std::string value;   // right of '='
  std::size_t value_offset;
};

class ChartReader {
 public:
  explicit ChartReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& what, std::size_t offset = 0) const {
    std::ostringstream msg;
    msg << source_ << ":" << line << ": " << what;
    throw ParseError(msg.str(), offset, {}, line);
  }

  double parse_bound(const Line& line, std::string_view text) const {
    text = trim(text);
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      fail(line.number, "malformed domain bound '" + std::string(text) + "'");
    }
    return v;
  }

  int parse_index(const Line& line, const std::string& text) const {
    int v = -1;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 0) {
      fail(line.number, "malformed metric index '" + text + "'");
    }
    return v;
  }

  Chart read(std::string_view text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    int number = 0;
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      ++number;
      std::string_view raw = text.substr(pos, end - pos);
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      if (!trim(raw).empty()) {
        const auto eq = raw.find('=');
        if (eq == std::string_view::npos) fail(number, "expected 'key = value'");
        std::string_view value = raw.substr(eq + 1);
        std::size_t lead = 0;
        while (lead < value.size() && std::isspace(static_cast<unsigned char>(value[lead]))) ++lead;
        lines.push_back({number, pos, std::string(trim(raw.substr(0, eq))), std::string(trim(value)),
                         pos + eq + 1 + lead});
      }
      if (end == text.size()) break;
      pos = end + 1;
    }

    std::optional<int> dim;
    std::optional<std::vector<std::string>> coords;
    for (const auto& line : lines) {
      if (line.key == "dim") {
        if (dim) fail(line.number, "duplicate 'dim'");
        int v = 0;
        const auto res = std::from_chars(line.value.data(), line.value.data() + line.value.size(), v);
        if (res.ec != std::errc() || res.ptr != line.value.data() + line.value.size() || v < 1) {
          fail(line.number, "dim must be a positive integer");
        }
        dim = v;
      } else if (line.key == "coords") {
        if (coords) fail(line.number, "duplicate 'coords'");
        coords = split_words(line.value);
        for (std::size_t i = 0; i < coords->size(); ++i) {
          const auto& name = (*coords)[i];
          if (!valid_identifier(name)) fail(line.number, "invalid coordinate name '" + name + "'");
          if (function_from_name(name)) {
            fail(line.number, "coordinate name '" + name + "' collides with a function name");
          }
          if (std::find(coords->begin(), coords->begin() + i, name) != coords->begin() + i) {
            fail(line.number, "duplicate coordinate name '" + name + "'");
          }
        }
      }
    }
    if (!dim) fail(number, "missing required field 'dim'");
    if (!coords) fail(number, "missing required field 'coords'");
    const int n = *dim;
    if (static_cast<int>(coords->size()) != n) {
      std::ostringstream msg;
      msg << "dimension mismatch: dim = " << n << " but " << coords->size() << " coordinates declared";
      fail(number, msg.str());
    }

    std::vector<Expr> metric(n * n);
    std::vector<std::optional<Interval>> domain(n);
    for (const auto& line : lines) {
      if (line.key == "dim" || line.key == "coords") continue;
      const auto words = split_words(line.key);
      if (!words.empty() && words[0] == "g") {
        if (words.size() != 3) fail(line.number, "metric entries are written 'g <i> <j> = <expression>'");
        const int i = parse_index(line, words[1]);
        const int j = parse_index(line, words[2]);
        if (i >= n || j >= n) {
          std::ostringstream msg;
          msg << "dimension mismatch: metric entry (" << i << ", " << j << ") outside a " << n << "x" << n
              << " metric";
          fail(line.number, msg.str());
        }
        if (i > j) fail(line.number, "metric entries require i <= j (the lower triangle mirrors)");
        if (!metric[i * n + j].empty()) fail(line.number, "duplicate metric entry");
        try {
          metric[i * n + j] = parse_expression(line.value, *coords);
        } catch (const ParseError& err) {
          std::ostringstream msg;
          msg << source_ << ":" << line.number << ": " << err.what();
          throw ParseError(msg.str(), line.value_offset + err.offset(), err.expected(), line.number);
        }
      } else if (!words.empty() && words[0] == "domain") {
        if (words.size() != 2) fail(line.number, "domain hints are written 'domain <name> = (<lo>, <hi>)'");
        const auto it = std::find(coords->begin(), coords->end(), words[1]);
        if (it == coords->end()) fail(line.number, "domain hint for unknown coordinate '" + words[1] + "'");
        std::string_view v = line.value;
        const auto comma = v.find(',');
        if (v.size() < 2 || v.front() != '(' || v.back() != ')' || comma == std::string_view::npos) {
          fail(line.number, "domain must be an open interval '(<lo>, <hi>)'");
        }
        const double lo = parse_bound(line, v.substr(1, comma - 1));
        const double hi = parse_bound(line, v.substr(comma + 1, v.size() - comma - 2));
        if (!(lo < hi)) fail(line.number, "empty domain interval");
        auto& slot = domain[it - coords->begin()];
        if (slot) fail(line.number, "duplicate domain hint");
        slot = Interval{lo, hi};
      } else {
        fail(line.number, "unknown key '" + line.key + "'");
      }
    }
    return Chart(std::move(*coords), std::move(metric), std::move(domain));
  }

 private:
  std::string source_;
};

}  // namespace

Chart Chart::parse(std::string_view text, const std::string& source) { return ChartReader(source).read(text); }

Chart Chart::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open chart file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading chart file '" + path.string() + "'");
  return parse(buf.str(), path.string());
}

}  // namespace geoscope
