// Copyright (c) the SELIC Project Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "selic/eval/metrics.h"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "selic/core/error.h"

namespace selic::eval {
namespace {

constexpr int kScales = 5;
constexpr std::array<double, kScales> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
constexpr double kC2 = (0.03 * 255) * (0.03 * 255);

void RequireSameDims(const ImagePlane& a, const ImagePlane& b) {
  Require(a.dims() == b.dims(), ErrorKind::kShape,
          "image dimensions differ: " + std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
              std::to_string(b.height()) + "x" + std::to_string(b.width()));
  Require(!a.empty(), ErrorKind::kInvalidInput, "images are empty");
}

using Plane = Eigen::ArrayXXd;

Plane Channel255(const ImagePlane& img, int c) {
  Plane p(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) p(y, x) = std::round(std::clamp(img.at(c, y, x), 0.0f, 1.0f) * 255.0);
  return p;
}

std::array<double, kWindow> GaussianTaps() {
  std::array<double, kWindow> taps;
  double sum = 0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2 * kWindowSigma * kWindowSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable valid-mode Gaussian filter.
Plane Filter(const Plane& p) {
  static const std::array<double, kWindow> taps = GaussianTaps();
  const Eigen::Index h = p.rows() - kWindow + 1, w = p.cols() - kWindow + 1;
  Plane rows = Plane::Zero(h, p.cols());
  for (int k = 0; k < kWindow; ++k) rows += taps[k] * p.middleRows(k, h);
  Plane out = Plane::Zero(h, w);
  for (int k = 0; k < kWindow; ++k) out += taps[k] * rows.middleCols(k, w);
  return out;
}

// 2x2 average pooling. An odd side gets one zero of padding on each end and
// the divisor stays 4, so 161 px shrinks to 81 and the coarsest of the five
// scales still fits the 11-tap window.
Plane Downsample(const Plane& p) {
  const Eigen::Index py = p.rows() % 2, px = p.cols() % 2;
  Plane padded = Plane::Zero(p.rows() + 2 * py, p.cols() + 2 * px);
  padded.block(py, px, p.rows(), p.cols()) = p;
  const Eigen::Index h = p.rows() / 2 + py, w = p.cols() / 2 + px;
  Plane out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      out(y, x) = 0.25 * (padded(2 * y, 2 * x) + padded(2 * y + 1, 2 * x) + padded(2 * y, 2 * x + 1) +
                          padded(2 * y + 1, 2 * x + 1));
  return out;
}

// Mean SSIM and mean contrast-structure term at one scale.
std::pair<double, double> SsimTerms(const Plane& x, const Plane& y) {
  const Plane mx = Filter(x), my = Filter(y);
  const Plane sxx = Filter(x * x) - mx * mx;
  const Plane syy = Filter(y * y) - my * my;
  const Plane sxy = Filter(x * y) - mx * my;
  const Plane cs = (2 * sxy + kC2) / (sxx + syy + kC2);
  const Plane lum = (2 * mx * my + kC1) / (mx * mx + my * my + kC1);
  return {(lum * cs).mean(), cs.mean()};
}

Eigen::VectorXd Polyfit3(const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::MatrixXd a(x.size(), 4);
  Eigen::VectorXd b(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 4; ++k) a(i, k) = std::pow(x[i], k);
    b(i) = y[i];
  }
  return a.colPivHouseholderQr().solve(b);
}

// Integral of the cubic c over [lo, hi].
double Integrate(const Eigen::VectorXd& c, double lo, double hi) {
  double total = 0;
  for (int k = 0; k < 4; ++k) total += c(k) * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
  return total;
}

// Mean difference of the two fitted curves v(u) over the overlap of u.
double MeanGap(const std::vector<double>& u_test, const std::vector<double>& v_test,
               const std::vector<double>& u_anchor, const std::vector<double>& v_anchor) {
  const double lo = std::max(*std::min_element(u_test.begin(), u_test.end()),
                             *std::min_element(u_anchor.begin(), u_anchor.end()));
  const double hi = std::min(*std::max_element(u_test.begin(), u_test.end()),
                             *std::max_element(u_anchor.begin(), u_anchor.end()));
  Require(hi > lo, ErrorKind::kInvalidInput, "RD curves do not overlap");
  // Centering keeps the normal equations well conditioned.
  const double mid = 0.5 * (lo + hi);
  const auto shift = [mid](std::vector<double> v) {
    for (double& x : v) x -= mid;
    return v;
  };
  const Eigen::VectorXd ct = Polyfit3(shift(u_test), v_test);
  const Eigen::VectorXd ca = Polyfit3(shift(u_anchor), v_anchor);
  return (Integrate(ct, lo - mid, hi - mid) - Integrate(ca, lo - mid, hi - mid)) / (hi - lo);
}

void RequireBdCurve(const RdCurve& c) {
  Require(c.points.size() >= 4, ErrorKind::kInvalidInput,
          "curve '" + c.label + "' has " + std::to_string(c.points.size()) + " points; BD metrics need at least 4");
  for (const RdPoint& p : c.points) {
    Require(p.bpp > 0 && std::isfinite(p.psnr_db), ErrorKind::kInvalidInput,
            "curve '" + c.label + "' has a point with non-positive rate or non-finite PSNR");
  }
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseCell(const std::string& cell, const std::string& what, int line_no) {
  if (cell == "inf") return kInfinitePsnr;
  try {
    size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorKind::kInvalidInput, "line " + std::to_string(line_no) + ": bad " + what + " '" + cell + "'");
}

std::string XmlEscape(const std::string& text) {
  std::string out;
  for (char ch : text) {
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

}  // namespace

double Psnr(const ImagePlane& a, const ImagePlane& b) {
  RequireSameDims(a, b);
  double se = 0;
  for (int c = 0; c < 3; ++c) se += (Channel255(a, c) - Channel255(b, c)).square().sum();
  if (se == 0) return kInfinitePsnr;
  const double mse = se / (3.0 * a.plane_size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double MsSsim(const ImagePlane& a, const ImagePlane& b) {
  RequireSameDims(a, b);
  Require(std::min(a.height(), a.width()) >= kMsSsimMinSide, ErrorKind::kInvalidInput,
          "MS-SSIM needs both sides >= " + std::to_string(kMsSsimMinSide) + " px, got " + std::to_string(a.height()) +
              "x" + std::to_string(a.width()));
  double total = 0;
  for (int c = 0; c < 3; ++c) {
    Plane x = Channel255(a, c), y = Channel255(b, c);
    double value = 1;
    for (int s = 0; s < kScales; ++s) {
      const auto [ssim, cs] = SsimTerms(x, y);
      const double term = std::max(s == kScales - 1 ? ssim : cs, 0.0);
      value *= std::pow(term, kScaleWeights[s]);
      if (s + 1 < kScales) {
        x = Downsample(x);
        y = Downsample(y);
      }
    }
    total += value;
  }
  return total / 3;
}

void NormalizeCurve(RdCurve& curve) {
  std::sort(curve.points.begin(), curve.points.end(), [](const RdPoint& a, const RdPoint& b) { return a.bpp < b.bpp; });
  for (size_t i = 0; i < curve.points.size(); ++i) {
    Require(curve.points[i].bpp > 0, ErrorKind::kInvalidInput, "curve '" + curve.label + "' has bpp <= 0");
    Require(i == 0 || curve.points[i].bpp > curve.points[i - 1].bpp, ErrorKind::kInvalidInput,
            "curve '" + curve.label + "' repeats a bpp value");
  }
}

double BdRate(const RdCurve& test, const RdCurve& anchor) {
  RequireBdCurve(test);
  RequireBdCurve(anchor);
  std::vector<double> pt, rt, pa, ra;
  for (const RdPoint& p : test.points) {
    pt.push_back(p.psnr_db);
    rt.push_back(std::log10(p.bpp));
  }
  for (const RdPoint& p : anchor.points) {
    pa.push_back(p.psnr_db);
    ra.push_back(std::log10(p.bpp));
  }
  return (std::pow(10.0, MeanGap(pt, rt, pa, ra)) - 1.0) * 100.0;
}

double BdPsnr(const RdCurve& test, const RdCurve& anchor) {
  RequireBdCurve(test);
  RequireBdCurve(anchor);
  std::vector<double> pt, rt, pa, ra;
  for (const RdPoint& p : test.points) {
    pt.push_back(p.psnr_db);
    rt.push_back(std::log10(p.bpp));
  }
  for (const RdPoint& p : anchor.points) {
    pa.push_back(p.psnr_db);
    ra.push_back(std::log10(p.bpp));
  }
  return MeanGap(rt, pt, ra, pa);
}

std::vector<RdCurve> ReadRdCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot read " + path.string());
  std::vector<RdCurve> curves;
  std::map<std::string, size_t> index;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      Require(line == "label,bpp,psnr_db,ms_ssim", ErrorKind::kInvalidInput,
              path.string() + ": expected header 'label,bpp,psnr_db,ms_ssim'");
      header = true;
      continue;
    }
    const std::vector<std::string> cells = SplitCsv(line);
    Require(cells.size() == 4, ErrorKind::kInvalidInput,
            path.string() + ": line " + std::to_string(line_no) + " needs 4 columns");
    RdPoint p;
    p.bpp = ParseCell(cells[1], "bpp", line_no);
    p.psnr_db = ParseCell(cells[2], "psnr_db", line_no);
    if (!cells[3].empty()) p.ms_ssim = ParseCell(cells[3], "ms_ssim", line_no);
    auto [it, inserted] = index.try_emplace(cells[0], curves.size());
    if (inserted) curves.push_back({cells[0], {}});
    curves[it->second].points.push_back(p);
  }
  Require(header, ErrorKind::kInvalidInput, path.string() + ": no RD header");
  for (RdCurve& c : curves) NormalizeCurve(c);
  return curves;
}

void WriteRdCsv(const std::filesystem::path& path, const std::vector<RdCurve>& curves) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << "# selic rd-curve v1\nlabel,bpp,psnr_db,ms_ssim\n";
  for (const RdCurve& c : curves) {
    Require(c.label.find_first_of(",\n\r") == std::string::npos && !c.label.empty() && c.label[0] != '#',
            ErrorKind::kInvalidInput, "curve label '" + c.label + "' cannot be stored in an RD csv");
    for (const RdPoint& p : c.points) {
      out << c.label << ',' << FormatMetric(p.bpp, 6) << ',' << FormatMetric(p.psnr_db, 4) << ','
          << (std::isnan(p.ms_ssim) ? "" : FormatMetric(p.ms_ssim, 6)) << '\n';
    }
  }
}

std::string FormatMetric(double value, int precision) {
  if (value == kInfinitePsnr) return "inf";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << value;
  return s.str();
}

std::string RdPlotSvg(const std::vector<RdCurve>& curves, const std::string& title) {
  constexpr double kW = 640, kH = 420, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const RdCurve& c : curves) {
    for (const RdPoint& p : c.points) {
      if (!std::isfinite(p.psnr_db)) continue;
      x0 = std::min(x0, p.bpp);
      x1 = std::max(x1, p.bpp);
      y0 = std::min(y0, p.psnr_db);
      y1 = std::max(y1, p.psnr_db);
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x0 -= 0.05, x1 += 0.05;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  const auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  std::ostringstream s;
  s.precision(5);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << XmlEscape(title) << "</text>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\"" << kH - kBottom
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = x0 + (x1 - x0) * i / 4, y = y0 + (y1 - y0) * i / 4;
    s << "<text x=\"" << px(x) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">" << FormatMetric(x, 3)
      << "</text>\n";
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << FormatMetric(y, 2)
      << "</text>\n";
  }
  s << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">bpp</text>\n";
  s << "<text x=\"16\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 16 " << kH / 2
    << ")\" text-anchor=\"middle\">PSNR (dB)</text>\n";
  for (size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % kColors.size()];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const RdPoint& p : curves[i].points) {
      if (std::isfinite(p.psnr_db)) s << px(p.bpp) << ',' << py(p.psnr_db) << ' ';
    }
    s << "\"/>\n";
    for (const RdPoint& p : curves[i].points) {
      if (std::isfinite(p.psnr_db)) {
        s << "<circle cx=\"" << px(p.bpp) << "\" cy=\"" << py(p.psnr_db) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    s << "<text x=\"" << kW - kRight - 150 << "\" y=\"" << kTop + 16 * (i + 1) << "\" fill=\"" << color << "\">"
      << XmlEscape(curves[i].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace selic::eval
