#include "qbgraph/io.hpp"

#include "qbgraph/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace qbgraph {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

std::vector<std::vector<double>> read_rows(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    for (const auto& f : split(t, ',')) row.push_back(parse_double(f));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t first) {
  const Index n = static_cast<Index>(rows.size() - first);
  const Index p = n > 0 ? static_cast<Index>(rows[first].size()) : 0;
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) m(i, j) = rows[first + static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(x);
  return j;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = j[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[i].get<double>();
  }
  return v;
}

Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, x);
  if (t.empty() || res.ec != std::errc() || res.ptr != end) {
    throw InvalidArgument("not a number: '" + t + "'");
  }
  return x;
}

void write_data_csv(const fs::path& path, const Matrix& values, const std::vector<std::string>& comments) {
  std::ofstream out = open_out(path);
  write_comments(out, comments);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix read_data_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  if (rows.empty()) throw IoError(path.string() + ": no data rows");
  return rows_to_matrix(rows, 0);
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& comments) {
  std::ofstream out = open_out(path);
  write_comments(out, comments);
  for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << j + 1;
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix read_matrix_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  if (rows.size() < 2) throw IoError(path.string() + ": missing header or rows");
  Matrix m = rows_to_matrix(rows, 1);
  if (m.rows() != m.cols()) throw IoError(path.string() + ": matrix is not square");
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  const Index n = static_cast<Index>(j.size());
  const Index p = n > 0 ? static_cast<Index>(j[0].size()) : 0;
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != p) throw InvalidArgument("ragged matrix in JSON");
    m.row(i) = vector_from_json(row).transpose();
  }
  return m;
}

Json to_json(const ChainSummary& s) {
  Json rates = Json::object();
  for (const auto& [k, v] : s.acceptance_rates) rates[k] = v;
  return Json{{"inclusion_freq", vector_to_json(s.inclusion_freq)},
              {"theta_mean", vector_to_json(s.theta_mean)},
              {"theta_q025", vector_to_json(s.theta_q025)},
              {"theta_median", vector_to_json(s.theta_median)},
              {"theta_q975", vector_to_json(s.theta_q975)},
              {"loglik_mean", s.loglik_mean},
              {"loglik_var", s.loglik_var},
              {"geweke_z", optional_json(s.geweke_z)},
              {"acceptance_rates", rates},
              {"retained", s.retained}};
}

ChainSummary chain_summary_from_json(const Json& j) {
  ChainSummary s;
  s.inclusion_freq = vector_from_json(j.at("inclusion_freq"));
  s.theta_mean = vector_from_json(j.at("theta_mean"));
  s.theta_q025 = vector_from_json(j.at("theta_q025"));
  s.theta_median = vector_from_json(j.at("theta_median"));
  s.theta_q975 = vector_from_json(j.at("theta_q975"));
  s.loglik_mean = j.at("loglik_mean").get<double>();
  s.loglik_var = j.at("loglik_var").get<double>();
  if (!j.at("geweke_z").is_null()) s.geweke_z = j.at("geweke_z").get<double>();
  for (const auto& [k, v] : j.at("acceptance_rates").items()) s.acceptance_rates[k] = v.get<double>();
  s.retained = j.at("retained").get<std::int64_t>();
  return s;
}

Json to_json(const FitResult& fit) {
  Json summaries = Json::array();
  for (const auto& s : fit.summaries) summaries.push_back(to_json(s));
  return Json{{"config", fit.config_echo},
              {"sigma2", vector_to_json(fit.sigma2_used)},
              {"a2", fit.a2_used},
              {"wall_time", fit.wall_time},
              {"summaries", summaries}};
}

FitResult fit_result_from_json(const Json& j) {
  FitResult fit;
  fit.config_echo = j.at("config").get<std::map<std::string, std::string>>();
  fit.sigma2_used = vector_from_json(j.at("sigma2"));
  fit.a2_used = j.at("a2").get<double>();
  fit.wall_time = j.at("wall_time").get<double>();
  for (const auto& s : j.at("summaries")) fit.summaries.push_back(chain_summary_from_json(s));
  return fit;
}

Json to_json(const GraphEstimate& est) {
  return Json{{"delta_hat", matrix_to_json(est.delta_hat.cast<double>())},
              {"theta_hat", matrix_to_json(est.theta_hat.entries())},
              {"interval_lower", matrix_to_json(est.intervals.lower)},
              {"interval_upper", matrix_to_json(est.intervals.upper)},
              {"interval_disjoint", matrix_to_json(est.intervals.disjoint.cast<double>())}};
}

GraphEstimate graph_estimate_from_json(const Json& j) {
  GraphEstimate est;
  est.delta_hat = matrix_from_json(j.at("delta_hat")).cast<std::uint8_t>();
  est.theta_hat = PrecisionMatrix(matrix_from_json(j.at("theta_hat")));
  est.intervals.lower = matrix_from_json(j.at("interval_lower"));
  est.intervals.upper = matrix_from_json(j.at("interval_upper"));
  est.intervals.disjoint = matrix_from_json(j.at("interval_disjoint")).cast<std::uint8_t>();
  return est;
}

Json to_json(const TheoryReport& r) {
  Json lower = Json::object();
  Json upper = Json::object();
  for (const auto& [s, v] : r.kappa_lower) lower[std::to_string(s)] = v;
  for (const auto& [s, v] : r.kappa_upper) upper[std::to_string(s)] = v;
  auto opt_vec = [](const std::optional<Vector>& v) { return v ? vector_to_json(*v) : Json(nullptr); };
  auto opt_bool = [](const std::optional<bool>& b) { return b ? Json(*b) : Json(nullptr); };
  return Json{{"n", r.n},
              {"p", r.p},
              {"u", r.u},
              {"constants", {{"c1", r.c1}, {"c2", r.c2}, {"c3", r.c3}, {"c4", r.c4}}},
              {"s_star_j", r.s_star_j},
              {"s_star", r.s_star},
              {"kappa_lower", lower},
              {"kappa_upper", upper},
              {"kappa_underline", optional_json(r.kappa_underline)},
              {"rho", vector_to_json(r.rho)},
              {"zeta", opt_vec(r.zeta)},
              {"s_bar_j", opt_vec(r.s_bar_j)},
              {"s_bar", r.s_bar ? Json(*r.s_bar) : Json(nullptr)},
              {"epsilon", optional_json(r.epsilon)},
              {"M0", r.M0},
              {"p_large_enough", r.p_large_enough},
              {"sample_size_thm1", opt_bool(r.sample_size_thm1)},
              {"sample_size_thm2", opt_bool(r.sample_size_thm2)},
              {"flags", r.flags}};
}

Json to_json(const Metrics& m) {
  return Json{{"rel_error", m.rel_error},
              {"sensitivity", optional_json(m.sensitivity)},
              {"precision", optional_json(m.precision)}};
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw InvalidArgument("config line " + std::to_string(number) + ": " + what);
    };
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) fail("malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!section.empty()) key = section + "." + key;
    if (!out.emplace(key, value).second) fail("duplicate key " + key);
  }
  return out;
}

std::string interval_svg(const GraphEstimate& estimate, const std::optional<PrecisionMatrix>& truth) {
  const IntervalMatrix& iv = estimate.intervals;
  const Index p = iv.lower.rows();
  if (truth && truth->dim() != p) throw InvalidArgument("truth and estimate sizes differ");
  struct Bar {
    double lo, hi;
    std::optional<double> dot;
  };
  std::vector<Bar> bars;
  double ymin = 0.0;
  double ymax = 0.0;
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      Bar b{iv.lower(i, j), iv.upper(i, j), std::nullopt};
      if (truth) b.dot = (*truth)(i, j);
      ymin = std::min({ymin, b.lo, b.dot.value_or(0.0)});
      ymax = std::max({ymax, b.hi, b.dot.value_or(0.0)});
      bars.push_back(b);
    }
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double left = 60.0;
  const double top = 20.0;
  const double height = 300.0;
  const double step = 6.0;
  const double width = left + step * static_cast<double>(bars.size() + 1) + 20.0;
  auto y = [&](double v) { return top + height * (ymax - v) / (ymax - ymin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(width) << "\" height=\""
      << fixed2(height + 2 * top) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fixed2(width) << "\" height=\"" << fixed2(height + 2 * top)
      << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(y(0.0)) << "\" x2=\"" << fixed2(width - 20.0)
      << "\" y2=\"" << fixed2(y(0.0)) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"4\" y=\"" << fixed2(y(ymax - pad) + 4) << "\" font-size=\"10\">" << fixed2(ymax - pad)
      << "</text>\n";
  svg << "<text x=\"4\" y=\"" << fixed2(y(ymin + pad) + 4) << "\" font-size=\"10\">" << fixed2(ymin + pad)
      << "</text>\n";
  for (std::size_t k = 0; k < bars.size(); ++k) {
    const double x = left + step * static_cast<double>(k + 1);
    svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(y(bars[k].hi)) << "\" x2=\"" << fixed2(x)
        << "\" y2=\"" << fixed2(y(bars[k].lo))
        << "\" stroke=\"steelblue\" stroke-width=\"3\" stroke-linecap=\"square\"/>\n";
    if (bars[k].dot) {
      svg << "<circle cx=\"" << fixed2(x) << "\" cy=\"" << fixed2(y(*bars[k].dot))
          << "\" r=\"2\" fill=\"crimson\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_interval_svg(const GraphEstimate& estimate, const std::optional<PrecisionMatrix>& truth,
                         const fs::path& path) {
  write_text(path, interval_svg(estimate, truth));
}

}  // namespace qbgraph
