#include "modelspace/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <system_error>

#include <unistd.h>

namespace modelspace::report {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view col) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == col) return i;
  throw std::out_of_range("table " + name + " has no column '" + std::string(col) + "'");
}

std::vector<double> Table::numeric_column(std::string_view col) const {
  const std::size_t c = column(col);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (const auto* i = std::get_if<std::int64_t>(&r[c]))
      out.push_back(static_cast<double>(*i));
    else if (const auto* d = std::get_if<double>(&r[c]))
      out.push_back(*d);
    else
      throw std::invalid_argument("table " + name + ": column '" + std::string(col) + "' is not numeric");
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::get<std::string>(c);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (lo == hi) lo -= 0.5, hi += 0.5;
  }
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

std::vector<std::size_t> kept_rows(const Table& t, const PlotSpec& spec) {
  std::vector<std::size_t> keep;
  if (spec.filter_column.empty()) {
    for (std::size_t i = 0; i < t.rows.size(); ++i) keep.push_back(i);
    return keep;
  }
  const std::vector<double> f = t.numeric_column(spec.filter_column);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] == spec.filter_value) keep.push_back(i);
  return keep;
}

void header(std::string& s, const PlotSpec& spec, const Json& metadata) {
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight) +
       "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<metadata>" + xml_escape(metadata.dump()) + "</metadata>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title = spec.title.empty() ? spec.name : spec.title;
  s += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(title) +
       "</text>\n";
}

void axes(std::string& s, const Range& xr, const Range& yr, const std::string& xlabel, const std::string& ylabel,
          bool log_y) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s += "<g stroke=\"black\" fill=\"none\"><line x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x1) +
       "\" y2=\"" + fixed(y0) + "\"/><line x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x0) +
       "\" y2=\"" + fixed(y1) + "\"/></g>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double px = xr.map(xv, x0, x1);
    s += "<line x1=\"" + fixed(px) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(px) + "\" y2=\"" + fixed(y0 + 5) +
         "\" stroke=\"black\"/>";
    s += "<text x=\"" + fixed(px) + "\" y=\"" + fixed(y0 + 18) + "\" text-anchor=\"middle\">" + tick_label(xv) +
         "</text>\n";
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double py = yr.map(yv, y0, y1);
    s += "<line x1=\"" + fixed(x0 - 5) + "\" y1=\"" + fixed(py) + "\" x2=\"" + fixed(x0) + "\" y2=\"" + fixed(py) +
         "\" stroke=\"black\"/>";
    s += "<text x=\"" + fixed(x0 - 8) + "\" y=\"" + fixed(py + 4) + "\" text-anchor=\"end\">" +
         tick_label(log_y ? std::pow(10.0, yv) : yv) + "</text>\n";
  }
  s += "<text x=\"" + fixed((x0 + x1) / 2) + "\" y=\"" + fixed(kHeight - 18) + "\" text-anchor=\"middle\">" +
       xml_escape(xlabel) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fixed((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed((y0 + y1) / 2) + ")\">" + xml_escape(ylabel) + "</text>\n";
}

std::string line_plot(const Table& t, const PlotSpec& spec, const Json& metadata) {
  if (spec.y.empty()) throw std::invalid_argument("plot " + spec.name + ": no y columns");
  const std::vector<std::size_t> rows = kept_rows(t, spec);
  const std::vector<double> xs_all = t.numeric_column(spec.x);
  std::vector<std::vector<double>> ys_all;
  for (const auto& c : spec.y) ys_all.push_back(t.numeric_column(c));
  const auto ty = [&](double v) {
    return spec.log_y ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v;
  };
  Range xr, yr;
  for (std::size_t r : rows) {
    xr.add(xs_all[r]);
    for (const auto& ys : ys_all) yr.add(ty(ys[r]));
  }
  xr.settle();
  yr.settle();

  std::string s;
  header(s, spec, metadata);
  axes(s, xr, yr, spec.x, spec.log_y ? spec.y.front() + " (log scale)" : spec.y.front(), spec.log_y);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  for (std::size_t k = 0; k < ys_all.size(); ++k) {
    const char* colour = kPalette[k % kPalette.size()];
    std::string pts;
    std::string marks;
    for (std::size_t r : rows) {
      const double yv = ty(ys_all[k][r]);
      if (!std::isfinite(xs_all[r]) || !std::isfinite(yv)) continue;
      const std::string px = fixed(xr.map(xs_all[r], x0, x1));
      const std::string py = fixed(yr.map(yv, y0, y1));
      pts += px + "," + py + " ";
      marks += "<circle cx=\"" + px + "\" cy=\"" + py + "\" r=\"3\" fill=\"" + colour + "\"/>";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n" + marks + "\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    s += "<rect x=\"" + fixed(x1 + 15) + "\" y=\"" + fixed(ly - 8) + "\" width=\"12\" height=\"12\" fill=\"" + colour +
         "\"/><text x=\"" + fixed(x1 + 32) + "\" y=\"" + fixed(ly + 2) + "\">" + xml_escape(spec.y[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string heat_colour(double u) {
  // blue -> yellow
  u = std::clamp(u, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + u * (250 - 40)));
  const int g = static_cast<int>(std::lround(60 + u * (220 - 60)));
  const int b = static_cast<int>(std::lround(160 + u * (40 - 160)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string heatmap(const Table& t, const PlotSpec& spec, const Json& metadata) {
  const std::vector<std::size_t> rows = kept_rows(t, spec);
  const std::vector<double> xs = t.numeric_column(spec.x);
  const std::vector<double> ys = t.numeric_column(spec.y_axis);
  const std::vector<double> vs = t.numeric_column(spec.value);
  std::map<double, int> xi, yi;
  Range vr;
  const auto tv = [&](double v) {
    return spec.log_y ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v;
  };
  for (std::size_t r : rows) {
    xi.emplace(xs[r], 0);
    yi.emplace(ys[r], 0);
    vr.add(tv(vs[r]));
  }
  vr.settle();
  int k = 0;
  for (auto& [v, i] : xi) i = k++;
  k = 0;
  for (auto& [v, i] : yi) i = k++;

  std::string s;
  header(s, spec, metadata);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double cw = (x1 - x0) / std::max<std::size_t>(1, xi.size());
  const double ch = (y0 - y1) / std::max<std::size_t>(1, yi.size());
  for (std::size_t r : rows) {
    const double v = tv(vs[r]);
    if (!std::isfinite(v)) continue;
    const double px = x0 + cw * xi[xs[r]];
    const double py = y0 - ch * (yi[ys[r]] + 1);
    s += "<rect x=\"" + fixed(px) + "\" y=\"" + fixed(py) + "\" width=\"" + fixed(cw) + "\" height=\"" + fixed(ch) +
         "\" fill=\"" + heat_colour((v - vr.lo) / (vr.hi - vr.lo)) + "\"><title>" + format_number(vs[r]) +
         "</title></rect>\n";
  }
  for (const auto& [v, i] : xi)
    s += "<text x=\"" + fixed(x0 + cw * (i + 0.5)) + "\" y=\"" + fixed(y0 + 16) + "\" text-anchor=\"middle\">" +
         tick_label(v) + "</text>\n";
  for (const auto& [v, i] : yi)
    s += "<text x=\"" + fixed(x0 - 8) + "\" y=\"" + fixed(y0 - ch * (i + 0.5) + 4) + "\" text-anchor=\"end\">" +
         tick_label(v) + "</text>\n";
  s += "<text x=\"" + fixed((x0 + x1) / 2) + "\" y=\"" + fixed(kHeight - 18) + "\" text-anchor=\"middle\">" +
       xml_escape(spec.x) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fixed((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed((y0 + y1) / 2) + ")\">" + xml_escape(spec.y_axis) + "</text>\n";
  // colour bar
  for (int i = 0; i < 20; ++i) {
    const double py = y0 - (y0 - y1) * (i + 1) / 20.0;
    s += "<rect x=\"" + fixed(x1 + 20) + "\" y=\"" + fixed(py) + "\" width=\"16\" height=\"" + fixed((y0 - y1) / 20.0) +
         "\" fill=\"" + heat_colour(i / 19.0) + "\"/>";
  }
  const auto label = [&](double v) { return tick_label(spec.log_y ? std::pow(10.0, v) : v); };
  s += "\n<text x=\"" + fixed(x1 + 42) + "\" y=\"" + fixed(y1 + 10) + "\">" + label(vr.hi) + "</text>";
  s += "<text x=\"" + fixed(x1 + 42) + "\" y=\"" + fixed(y0) + "\">" + label(vr.lo) + "</text>";
  s += "<text x=\"" + fixed(x1 + 20) + "\" y=\"" + fixed(y1 - 8) + "\">" + xml_escape(spec.value) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(t.columns[i]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(format_cell(row[i]));
    }
    out += "\r\n";
  }
  return out;
}

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string render_svg(const Table& t, const PlotSpec& spec, const Json& metadata) {
  if (spec.kind == "line") return line_plot(t, spec, metadata);
  if (spec.kind == "heatmap") return heatmap(t, spec, metadata);
  throw std::invalid_argument("plot " + spec.name + ": unknown kind '" + spec.kind + "'");
}

}  // namespace modelspace::report
