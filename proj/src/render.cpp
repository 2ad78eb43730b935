#include "stitchfold/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "stitchfold/errors.hpp"

namespace stitchfold {
namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

Rgb hexcolor(const char* s) {  // "#rrggbb"
    auto hx = [&](int i) { return (std::uint8_t)std::stoi(std::string(s + i, 2), nullptr, 16); };
    return {hx(1), hx(3), hx(5)};
}

Rgb thread_rgb(const StitchRun& r) {
    if (r.thread == ThreadRole::shrink) return hexcolor("#d40000");
    if (r.thread == ThreadRole::soluble_bobbin) return hexcolor("#ff8800");
    if (r.tag == "fold") return hexcolor("#000000");
    return hexcolor("#888888");
}

struct Canvas {
    RasterImage img;
    Vec2 origin;  // mm of the top-left pixel corner
    double s;     // px per mm

    Vec2 to_px(const Vec2& mm) const { return (mm - origin) * s; }

    void stamp(const Vec2& a_mm, const Vec2& b_mm, double w_mm, Rgb c) {
        Vec2 a = to_px(a_mm), b = to_px(b_mm);
        double r = std::max(0.5 * w_mm * s, 0.6);  // keep hairlines visible
        int x0 = std::max(0, (int)std::floor(std::min(a.x, b.x) - r));
        int x1 = std::min(img.width - 1, (int)std::ceil(std::max(a.x, b.x) + r));
        int y0 = std::max(0, (int)std::floor(std::min(a.y, b.y) - r));
        int y1 = std::min(img.height - 1, (int)std::ceil(std::max(a.y, b.y) + r));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                Vec2 q{x + 0.5, y + 0.5};
                if (point_segment_dist(q, a, b) > r) continue;
                std::uint8_t* p = img.px(x, y);
                p[0] = c.r;
                p[1] = c.g;
                p[2] = c.b;
            }
    }

    void dot(const Vec2& c_mm, double r_mm, Rgb c) { stamp(c_mm, c_mm, 2 * r_mm, c); }

    void polyline(const std::vector<Vec2>& pts, bool closed, double w_mm, Rgb c) {
        for (size_t i = 0; i + 1 < pts.size(); ++i) stamp(pts[i], pts[i + 1], w_mm, c);
        if (closed && pts.size() > 2) stamp(pts.back(), pts.front(), w_mm, c);
    }
};

}  // namespace

RasterImage render_plan(const FabPlan& fab, const HoopPlan& hoops, const StitchProgram& prog,
                        double px_per_mm) {
    BBox bb;
    for (const auto& c : fab.cuts)
        for (const auto& q : c.pts) bb.add(q);
    for (int i = hoops.fab_squares; i < (int)hoops.squares.size(); ++i)
        for (const auto& q : hoops.squares[i].pts) bb.add(q);
    for (const auto& h : hoops.hoops) {
        bb.add(h.lo);
        bb.add(h.hi);
    }
    for (const auto& r : prog.runs)
        for (const auto& p : r.points) bb.add(p.pos);
    if (bb.lo.x > bb.hi.x) bb = BBox{{0, 0}, {1, 1}};

    const double pad = 5.0;
    Vec2 span = bb.size() + Vec2{2 * pad, 2 * pad};
    double s = std::min(px_per_mm, 12000.0 / std::max(span.x, span.y));

    Canvas cv;
    cv.origin = bb.lo - Vec2{pad, pad};
    cv.s = s;
    cv.img.width = std::max(1, (int)std::ceil(span.x * s));
    cv.img.height = std::max(1, (int)std::ceil(span.y * s));
    cv.img.rgb.assign(std::size_t(3) * cv.img.width * cv.img.height, 255);

    const Rgb hoop_grey = hexcolor("#cccccc");
    const Rgb cut_blue = hexcolor("#0000ff");
    const Rgb tab_green = hexcolor("#00aa00");

    for (const auto& h : hoops.hoops) {
        std::vector<Vec2> box{h.lo, {h.hi.x, h.lo.y}, h.hi, {h.lo.x, h.hi.y}};
        cv.polyline(box, true, 0.3, hoop_grey);
    }
    auto draw_cut = [&](const CutPath& c) {
        cv.polyline(c.pts, c.closed, 0.1,
                    c.kind == CutPath::Kind::tab_bridge ? tab_green : cut_blue);
    };
    for (const auto& c : fab.cuts) draw_cut(c);
    for (int i = hoops.fab_squares; i < (int)hoops.squares.size(); ++i)
        draw_cut(hoops.squares[i]);

    for (const auto& h : hoops.hoops)
        for (int id : h.runs) {
            const StitchRun* run = nullptr;
            for (const auto& r : prog.runs)
                if (r.id == id) run = &r;
            if (!run) continue;
            Rgb c = thread_rgb(*run);
            std::vector<Vec2> line;
            for (const auto& p : run->points) line.push_back(p.pos);
            cv.polyline(line, false, 0.2, c);
            for (const auto& p : run->points) cv.dot(p.pos, 0.15, c);
        }
    return cv.img;
}

namespace {

void put_be32(std::string& s, std::uint32_t v) {
    s.push_back(char(v >> 24));
    s.push_back(char(v >> 16));
    s.push_back(char(v >> 8));
    s.push_back(char(v));
}

void put_chunk(std::string& s, const char type[4], const std::string& data) {
    put_be32(s, (std::uint32_t)data.size());
    std::string body(type, 4);
    body += data;
    s += body;
    put_be32(s, (std::uint32_t)crc32(0, (const Bytef*)body.data(), (uInt)body.size()));
}

}  // namespace

void write_png(const RasterImage& img, const std::string& path) {
    std::string ihdr;
    put_be32(ihdr, (std::uint32_t)img.width);
    put_be32(ihdr, (std::uint32_t)img.height);
    ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB, no interlace

    // filter byte 0 before each scanline
    std::string raw;
    raw.reserve((std::size_t(img.width) * 3 + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back('\0');
        raw.append((const char*)img.px(0, y), std::size_t(img.width) * 3);
    }
    uLongf zcap = compressBound((uLong)raw.size());
    std::string z(zcap, '\0');
    if (compress2((Bytef*)z.data(), &zcap, (const Bytef*)raw.data(), (uLong)raw.size(), 6) != Z_OK)
        throw io_error("IoError", "png compression failed");
    z.resize(zcap);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", z);
    put_chunk(out, "IEND", "");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("IoError", "cannot open " + path + " for writing");
    f.write(out.data(), (std::streamsize)out.size());
    if (!f) throw io_error("IoError", "short write to " + path);
}

void render_svg_file(const std::string& svg_path, const std::string& png_path, double px_per_mm) {
    SvgBundle b = read_svg(svg_path);
    write_png(render_plan(b.fab, b.hoops, b.prog, px_per_mm), png_path);
}

}  // namespace stitchfold
