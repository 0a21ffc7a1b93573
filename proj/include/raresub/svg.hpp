#ifndef RARESUB_SVG_HPP
#define RARESUB_SVG_HPP

#include <string>

namespace raresub::svg {

// Minimal SVG 1.1 document builder. Coordinates are written with fixed
// two-decimal precision so emitted files are byte-stable across runs.
class Document {
public:
    Document(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0, bool dashed = false);
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none");
    void circle(double cx, double cy, double r, const std::string& fill);
    void text(double x, double y, const std::string& content, double font_size = 11.0,
              const std::string& anchor = "start", double rotate_deg = 0.0);
    void polyline(const std::string& points, const std::string& stroke,
                  double stroke_width = 1.5);

    static std::string coord(double v);

    std::string render() const;
    void write(const std::string& path) const;

private:
    double width_;
    double height_;
    std::string body_;
};

}  // namespace raresub::svg

#endif
