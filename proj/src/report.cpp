#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <openssl/evp.h>

#include "mflab/experiment.hpp"

namespace mflab {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(std::size_t{2} * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

namespace {

std::string fnum(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

}  // namespace

// Minimal self-contained log-log line chart; no external references.
std::string svg_loglog_chart(const ChartSpec& spec) {
  const double W = 640, H = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : spec.series) {
    for (double x : s.xs) {
      const double lx = std::log10(std::max(x, 1e-300));
      xmin = std::min(xmin, lx);
      xmax = std::max(xmax, lx);
    }
    for (double y : s.ys) {
      const double ly = std::log10(std::max(y, 1e-300));
      ymin = std::min(ymin, ly);
      ymax = std::max(ymax, ly);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return mt + ph - (ly - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fnum(W) + "\" height=\"" +
         fnum(H) + "\" viewBox=\"0 0 " + fnum(W) + " " + fnum(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fnum(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         spec.title + "</text>\n";

  // axes
  svg += "<line x1=\"" + fnum(ml) + "\" y1=\"" + fnum(mt + ph) + "\" x2=\"" + fnum(ml + pw) +
         "\" y2=\"" + fnum(mt + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fnum(ml) + "\" y1=\"" + fnum(mt) + "\" x2=\"" + fnum(ml) + "\" y2=\"" +
         fnum(mt + ph) + "\" stroke=\"black\"/>\n";

  // decade ticks
  for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e) {
    const double x = px(e);
    svg += "<line x1=\"" + fnum(x) + "\" y1=\"" + fnum(mt + ph) + "\" x2=\"" + fnum(x) +
           "\" y2=\"" + fnum(mt + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fnum(x) + "\" y=\"" + fnum(mt + ph + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" +
           std::to_string(e) + "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e) {
    const double y = py(e);
    svg += "<line x1=\"" + fnum(ml - 5) + "\" y1=\"" + fnum(y) + "\" x2=\"" + fnum(ml) +
           "\" y2=\"" + fnum(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fnum(ml - 8) + "\" y=\"" + fnum(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
           std::to_string(e) + "</text>\n";
  }
  svg += "<text x=\"" + fnum(ml + pw / 2) + "\" y=\"" + fnum(H - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + spec.xlabel +
         "</text>\n";
  svg += "<text x=\"16\" y=\"" + fnum(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
         fnum(mt + ph / 2) + ")\">" + spec.ylabel + "</text>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    std::string pts;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double x = px(std::log10(std::max(s.xs[i], 1e-300)));
      const double y = py(std::log10(std::max(s.ys[i], 1e-300)));
      pts += fnum(x) + "," + fnum(y) + " ";
      svg += "<circle cx=\"" + fnum(x) + "\" cy=\"" + fnum(y) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fnum(ml + pw - 6) + "\" y=\"" + fnum(mt + 16 + 16 * static_cast<double>(si)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color +
           "\">" + s.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void emit_report(const ReportDocument& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  nlohmann::json doc = report.doc;
  nlohmann::json artifacts;
  artifacts["tables"] = nlohmann::json::array();
  for (const Table& t : report.tables) artifacts["tables"].push_back(t.name + ".csv");
  artifacts["clouds"] = nlohmann::json::array();
  for (const auto& [name, cloud] : report.clouds) artifacts["clouds"].push_back(name);
  artifacts["charts"] = nlohmann::json::array();
  for (const ChartSpec& c : report.charts) artifacts["charts"].push_back(c.file);
  doc["artifacts"] = artifacts;
  doc["pass"] = report.pass;
  doc["summary"] = report.summary;

  write_file(dir / "report.json", doc.dump(2) + "\n");
  for (const Table& t : report.tables) write_file(dir / (t.name + ".csv"), t.to_csv());
  for (const auto& [name, cloud] : report.clouds) write_file(dir / name, cloud.to_csv());
  for (const ChartSpec& c : report.charts) write_file(dir / c.file, svg_loglog_chart(c));
}

}  // namespace mflab
