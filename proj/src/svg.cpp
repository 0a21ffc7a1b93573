#include "raresub/svg.hpp"

#include <cstdio>

#include "raresub/csv.hpp"

namespace raresub::svg {

namespace {

std::string escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

Document::Document(double width, double height) : width_(width), height_(height) {}

std::string Document::coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                    double stroke_width, bool dashed) {
    body_ += "<line x1=\"" + coord(x1) + "\" y1=\"" + coord(y1) + "\" x2=\"" + coord(x2) +
             "\" y2=\"" + coord(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             coord(stroke_width) + "\"";
    if (dashed) body_ += " stroke-dasharray=\"6,4\"";
    body_ += "/>\n";
}

void Document::rect(double x, double y, double w, double h, const std::string& fill,
                    const std::string& stroke) {
    body_ += "<rect x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" width=\"" + coord(w) +
             "\" height=\"" + coord(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

void Document::circle(double cx, double cy, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + coord(cx) + "\" cy=\"" + coord(cy) + "\" r=\"" + coord(r) +
             "\" fill=\"" + fill + "\"/>\n";
}

void Document::text(double x, double y, const std::string& content, double font_size,
                    const std::string& anchor, double rotate_deg) {
    body_ += "<text x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" font-size=\"" +
             coord(font_size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\"";
    if (rotate_deg != 0.0) {
        body_ += " transform=\"rotate(" + coord(rotate_deg) + " " + coord(x) + " " + coord(y) +
                 ")\"";
    }
    body_ += ">" + escape_text(content) + "</text>\n";
}

void Document::polyline(const std::string& points, const std::string& stroke,
                        double stroke_width) {
    body_ += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + stroke +
             "\" stroke-width=\"" + coord(stroke_width) + "\"/>\n";
}

std::string Document::render() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           coord(width_) + "\" height=\"" + coord(height_) + "\" viewBox=\"0 0 " + coord(width_) +
           " " + coord(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
}

void Document::write(const std::string& path) const { csv::write_file(path, render()); }

}  // namespace raresub::svg
