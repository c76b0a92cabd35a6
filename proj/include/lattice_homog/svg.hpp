#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lhomog::svg {

struct Box {
    double x;
    double q1, median, q3;
    double whisker_lo, whisker_hi;
};

/// Minimal 2-D chart writer: scatter, polylines, box plots, reference lines,
/// with optional log axes. Coordinates are data units.
class Chart {
public:
    Chart(std::string title, std::string xlabel, std::string ylabel, bool logx, bool logy)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)), logx_(logx), logy_(logy)
    {
    }

    void points(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color = "#1f77b4")
    {
        for (std::size_t i = 0; i < xs.size(); ++i) points_.push_back({xs[i], ys[i], color});
        for (std::size_t i = 0; i < xs.size(); ++i) extend(xs[i], ys[i]);
    }
    void line(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color = "#d62728",
              bool dashed = false)
    {
        lines_.push_back({xs, ys, color, dashed});
        for (std::size_t i = 0; i < xs.size(); ++i) extend(xs[i], ys[i]);
    }
    void box(const Box& b, double half_width)
    {
        boxes_.push_back({b, half_width});
        extend(b.x, b.whisker_lo);
        extend(b.x, b.whisker_hi);
    }
    void hline(double y, const std::string& label, const std::string& color = "#2ca02c")
    {
        hlines_.push_back({y, label, color});
        extend(std::numeric_limits<double>::quiet_NaN(), y);
    }
    void note(const std::string& text) { notes_.push_back(text); }

    std::string render() const
    {
        if (!std::isfinite(xmin_) || !std::isfinite(ymin_)) throw std::runtime_error("svg: chart has no data");
        Frame f = frame();
        std::ostringstream o;
        o.precision(6);
        o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
          << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_)
          << "</text>\n";
        o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        axis_ticks(o, f);
        o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(xlabel_)
          << "</text>\n";
        o << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
          << escape(ylabel_) << "</text>\n";

        for (const auto& h : hlines_) {
            const double y = f.py(h.y);
            o << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << y << "\" y2=\"" << y << "\" stroke=\""
              << h.color << "\" stroke-dasharray=\"6,4\"/>\n";
            o << "<text x=\"" << W - R - 4 << "\" y=\"" << y - 4 << "\" text-anchor=\"end\" fill=\"" << h.color << "\">"
              << escape(h.label) << "</text>\n";
        }
        for (const auto& bx : boxes_) {
            const auto& b = bx.box;
            const double x0 = f.px(shift(b.x, -bx.half_width)), x1 = f.px(shift(b.x, bx.half_width)), xc = f.px(b.x);
            o << "<line x1=\"" << xc << "\" x2=\"" << xc << "\" y1=\"" << f.py(b.whisker_lo) << "\" y2=\""
              << f.py(b.whisker_hi) << "\" stroke=\"black\"/>\n";
            o << "<rect x=\"" << x0 << "\" y=\"" << f.py(b.q3) << "\" width=\"" << x1 - x0 << "\" height=\""
              << std::max(0.5, f.py(b.q1) - f.py(b.q3)) << "\" fill=\"#aec7e8\" stroke=\"black\"/>\n";
            o << "<line x1=\"" << x0 << "\" x2=\"" << x1 << "\" y1=\"" << f.py(b.median) << "\" y2=\"" << f.py(b.median)
              << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
        }
        for (const auto& l : lines_) {
            o << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.5\""
              << (l.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
            for (std::size_t i = 0; i < l.xs.size(); ++i) o << f.px(l.xs[i]) << ',' << f.py(l.ys[i]) << ' ';
            o << "\"/>\n";
        }
        for (const auto& p : points_)
            o << "<circle cx=\"" << f.px(p.x) << "\" cy=\"" << f.py(p.y) << "\" r=\"3.5\" fill=\"" << p.color << "\"/>\n";
        double ny = T + 18;
        for (const auto& n : notes_) {
            o << "<text x=\"" << L + 8 << "\" y=\"" << ny << "\">" << escape(n) << "</text>\n";
            ny += 16;
        }
        o << "</svg>\n";
        return o.str();
    }

    void write(const std::string& path) const
    {
        const std::string s = render();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write plot: " + path);
        out << s;
        if (!out) throw std::runtime_error("write failed: " + path);
    }

private:
    static constexpr double W = 720, H = 480, L = 80, R = 24, T = 40, B = 56;

    struct Pt {
        double x, y;
        std::string color;
    };
    struct Line {
        std::vector<double> xs, ys;
        std::string color;
        bool dashed;
    };
    struct BoxItem {
        Box box;
        double half_width;
    };
    struct HLine {
        double y;
        std::string label, color;
    };

    struct Frame {
        double x0, x1, y0, y1;
        bool logx, logy;
        double tx(double v) const { return logx ? std::log10(v) : v; }
        double ty(double v) const { return logy ? std::log10(v) : v; }
        double px(double v) const { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); }
        double py(double v) const { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); }
    };

    double shift(double x, double d) const { return logx_ ? x * std::pow(10.0, d) : x + d; }

    void extend(double x, double y)
    {
        if (std::isfinite(x) && (!logx_ || x > 0)) xmin_ = std::min(xmin_, x), xmax_ = std::max(xmax_, x);
        if (std::isfinite(y) && (!logy_ || y > 0)) ymin_ = std::min(ymin_, y), ymax_ = std::max(ymax_, y);
    }

    Frame frame() const
    {
        Frame f{0, 1, 0, 1, logx_, logy_};
        auto pad = [](double& lo, double& hi, bool lg) {
            double a = lg ? std::log10(lo) : lo, b = lg ? std::log10(hi) : hi;
            if (b - a < 1e-12) a -= 0.5, b += 0.5;
            const double m = 0.08 * (b - a);
            lo = a - m;
            hi = b + m;
        };
        double x0 = xmin_, x1 = xmax_, y0 = ymin_, y1 = ymax_;
        if (!std::isfinite(x0)) x0 = logx_ ? 1.0 : 0.0, x1 = logx_ ? 10.0 : 1.0;
        pad(x0, x1, logx_);
        pad(y0, y1, logy_);
        f.x0 = x0, f.x1 = x1, f.y0 = y0, f.y1 = y1;
        return f;
    }

    void axis_ticks(std::ostringstream& o, const Frame& f) const
    {
        auto ticks = [](double a, double b, bool lg) {
            std::vector<double> t;
            if (lg) {
                for (double e = std::floor(a); e <= std::ceil(b); e += 1.0)
                    for (double m : {1.0, 2.0, 5.0}) {
                        const double v = std::log10(m) + e;
                        if (v >= a && v <= b) t.push_back(std::pow(10.0, v));
                    }
            } else {
                const double span = b - a, raw = span / 6.0;
                const double mag = std::pow(10.0, std::floor(std::log10(raw)));
                double step = mag;
                for (double m : {1.0, 2.0, 5.0, 10.0})
                    if (m * mag >= raw) {
                        step = m * mag;
                        break;
                    }
                for (double v = std::ceil(a / step) * step; v <= b; v += step) t.push_back(std::abs(v) < 1e-14 ? 0.0 : v);
            }
            return t;
        };
        for (double v : ticks(f.x0, f.x1, logx_)) {
            const double x = f.px(v);
            o << "<line x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << H - B << "\" y2=\"" << H - B + 5
              << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
              << label(v) << "</text>\n";
        }
        for (double v : ticks(f.y0, f.y1, logy_)) {
            const double y = f.py(v);
            o << "<line x1=\"" << L - 5 << "\" x2=\"" << L << "\" y1=\"" << y << "\" y2=\"" << y
              << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
              << label(v) << "</text>\n";
        }
    }

    static std::string label(double v)
    {
        std::ostringstream s;
        s.precision(3);
        s << v;
        return s.str();
    }

    static std::string escape(const std::string& s)
    {
        std::string out;
        for (char c : s) {
            if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else if (c == '&') out += "&amp;";
            else out += c;
        }
        return out;
    }

    std::string title_, xlabel_, ylabel_;
    bool logx_, logy_;
    double xmin_ = std::numeric_limits<double>::infinity(), xmax_ = -std::numeric_limits<double>::infinity();
    double ymin_ = std::numeric_limits<double>::infinity(), ymax_ = -std::numeric_limits<double>::infinity();
    std::vector<Pt> points_;
    std::vector<Line> lines_;
    std::vector<BoxItem> boxes_;
    std::vector<HLine> hlines_;
    std::vector<std::string> notes_;
};

} // namespace lhomog::svg
