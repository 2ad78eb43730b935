#include "stitchfold/exportio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stitchfold/config.hpp"
#include "stitchfold/errors.hpp"
#include "stitchfold/geom.hpp"

namespace stitchfold {

namespace {

std::string fnum(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.6f", v);
    return b;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_pairs(const std::vector<std::pair<int, int>>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i].first) + "-" + std::to_string(v[i].second);
    }
    return s;
}

const char* thread_color(const StitchRun& r) {
    if (r.thread == ThreadRole::shrink) return "#d40000";
    if (r.thread == ThreadRole::soluble_bobbin) return "#ff8800";
    if (r.tag == "fold") return "#000000";
    return "#888888";
}

std::string path_d(const std::vector<Vec2>& pts, bool closed) {
    std::string d;
    for (size_t i = 0; i < pts.size(); ++i) {
        d += i ? " L " : "M ";
        d += fnum(pts[i].x) + " " + fnum(pts[i].y);
    }
    if (closed) d += " Z";
    return d;
}

void append_cut(std::string& s, const CutPath& c, bool extra) {
    s += "    <path d=\"" + path_d(c.pts, c.closed) + "\" fill=\"none\" stroke=\"";
    s += c.kind == CutPath::Kind::tab_bridge ? "#00aa00" : "#0000ff";
    s += "\" stroke-width=\"0.1\" data-kind=\"";
    s += to_string(c.kind);
    s += "\" data-gap=\"" + std::to_string(c.gap) + "\" data-hole=\"" + std::to_string(c.hole);
    s += "\"";
    if (extra) s += " data-extra=\"1\"";
    s += "/>\n";
}

// --- strict reader for our own output ---------------------------------

[[noreturn]] void bad(const std::string& msg) { throw validation_error("FormatError", msg); }

struct XTag {
    std::string name;
    bool closing = false, self = false;
    std::vector<std::pair<std::string, std::string>> at;

    const std::string* find(const std::string& k) const {
        for (const auto& [key, val] : at)
            if (key == k) return &val;
        return nullptr;
    }
    const std::string& need(const std::string& k) const {
        const std::string* v = find(k);
        if (!v) bad("<" + name + "> is missing " + k);
        return *v;
    }
};

std::vector<XTag> scan_tags(const std::string& text) {
    std::vector<XTag> tags;
    size_t i = 0;
    while ((i = text.find('<', i)) != std::string::npos) {
        if (text.compare(i, 2, "<?") == 0) {
            size_t e = text.find("?>", i);
            if (e == std::string::npos) bad("unterminated declaration");
            i = e + 2;
            continue;
        }
        if (text.compare(i, 4, "<!--") == 0) {
            size_t e = text.find("-->", i);
            if (e == std::string::npos) bad("unterminated comment");
            i = e + 3;
            continue;
        }
        XTag t;
        ++i;
        if (i < text.size() && text[i] == '/') {
            t.closing = true;
            ++i;
        }
        while (i < text.size() && (std::isalnum((unsigned char)text[i]) || text[i] == '-'))
            t.name += text[i++];
        if (t.name.empty()) bad("empty tag name");
        while (true) {
            while (i < text.size() && std::isspace((unsigned char)text[i])) ++i;
            if (i >= text.size()) bad("unterminated tag <" + t.name + ">");
            if (text[i] == '>') {
                ++i;
                break;
            }
            if (text[i] == '/') {
                t.self = true;
                ++i;
                continue;
            }
            std::string key;
            while (i < text.size() && text[i] != '=' && !std::isspace((unsigned char)text[i]))
                key += text[i++];
            if (i >= text.size() || text[i] != '=' || key.empty())
                bad("malformed attribute in <" + t.name + ">");
            ++i;
            if (i >= text.size() || text[i] != '"') bad("unquoted attribute in <" + t.name + ">");
            ++i;
            size_t e = text.find('"', i);
            if (e == std::string::npos) bad("unterminated attribute in <" + t.name + ">");
            t.at.emplace_back(key, text.substr(i, e - i));
            i = e + 1;
        }
        tags.push_back(std::move(t));
    }
    return tags;
}

int to_int(const std::string& s) {
    size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (...) {
        bad("expected an integer, got '" + s + "'");
    }
    if (pos != s.size()) bad("expected an integer, got '" + s + "'");
    return v;
}

double to_num(const std::string& s) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (...) {
        bad("expected a number, got '" + s + "'");
    }
    if (pos != s.size()) bad("expected a number, got '" + s + "'");
    return v;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> v;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) v.push_back(to_int(tok));
    return v;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& s) {
    std::vector<std::pair<int, int>> v;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        size_t dash = tok.find('-', 1);  // first char may be a minus sign
        if (dash == std::string::npos) bad("expected a-b pair, got '" + tok + "'");
        v.emplace_back(to_int(tok.substr(0, dash)), to_int(tok.substr(dash + 1)));
    }
    return v;
}

std::pair<std::vector<Vec2>, bool> parse_d(const std::string& d) {
    std::vector<Vec2> pts;
    bool closed = false;
    std::istringstream is(d);
    std::string tok;
    while (is >> tok) {
        if (tok == "M" || tok == "L") {
            if (closed) bad("path data after Z");
            double x, y;
            if (!(is >> x >> y)) bad("path coordinate missing");
            pts.push_back({x, y});
        } else if (tok == "Z") {
            closed = true;
        } else {
            bad("unsupported path command '" + tok + "'");
        }
    }
    if (pts.empty()) bad("empty path");
    return {pts, closed};
}

CutPath::Kind kind_from(const std::string& s) {
    for (auto k : {CutPath::Kind::crease_dash, CutPath::Kind::outline,
                   CutPath::Kind::excess_removal, CutPath::Kind::tab_bridge,
                   CutPath::Kind::registration_square})
        if (s == to_string(k)) return k;
    bad("unknown cut kind '" + s + "'");
}

ThreadRole thread_from(const std::string& s) {
    for (auto r : {ThreadRole::shrink, ThreadRole::structural_top, ThreadRole::structural_bobbin,
                   ThreadRole::soluble_bobbin})
        if (s == to_string(r)) return r;
    bad("unknown thread role '" + s + "'");
}

PointRole point_role_from(const std::string& s) {
    for (auto r : {PointRole::lock, PointRole::channel, PointRole::fold_top,
                   PointRole::fold_bobbin_anchor, PointRole::soluble_hold})
        if (s == to_string(r)) return r;
    bad("unknown needle role '" + s + "'");
}

}  // namespace

void write_svg(const FabPlan& fab, const HoopPlan& hoops, const StitchProgram& prog,
               const std::string& path) {
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
        for (const auto& np : r.points) bb.add(np.pos);
    if (bb.lo.x > bb.hi.x) {
        bb.lo = {0, 0};
        bb.hi = {10, 10};
    }
    double pad = 5;
    double w = bb.hi.x - bb.lo.x + 2 * pad, h = bb.hi.y - bb.lo.y + 2 * pad;

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fnum(w) + "mm\" height=\"" +
         fnum(h) + "mm\" viewBox=\"" + fnum(bb.lo.x - pad) + " " + fnum(bb.lo.y - pad) + " " +
         fnum(w) + " " + fnum(h) + "\" data-generator=\"stitchfold\" data-fab-squares=\"" +
         std::to_string(hoops.fab_squares) + "\" data-hoop-deps=\"" + join_pairs(hoops.deps) +
         "\" data-run-deps=\"" + join_pairs(prog.deps) + "\">\n";

    s += "  <g id=\"cut\" data-layer=\"cut\">\n";
    for (const auto& c : fab.cuts) append_cut(s, c, false);
    for (int i = hoops.fab_squares; i < (int)hoops.squares.size(); ++i)
        append_cut(s, hoops.squares[i], true);
    s += "  </g>\n";

    std::vector<const StitchRun*> by_id;
    for (const auto& r : prog.runs) {
        if (r.id >= (int)by_id.size()) by_id.resize(r.id + 1, nullptr);
        by_id[r.id] = &r;
    }
    for (size_t k = 0; k < hoops.hoops.size(); ++k) {
        const Hoop& hp = hoops.hoops[k];
        std::string layer = "stitch-hoop-" + std::to_string(k + 1);
        s += "  <g id=\"" + layer + "\" data-layer=\"" + layer + "\" data-box=\"" + fnum(hp.lo.x) +
             " " + fnum(hp.lo.y) + " " + fnum(hp.hi.x) + " " + fnum(hp.hi.y) + "\" data-faces=\"" +
             join_ints(hp.faces) + "\" data-regs=\"" + join_ints(hp.regs) + "\">\n";
        for (int id : hp.runs) {
            const StitchRun* r = id >= 0 && id < (int)by_id.size() ? by_id[id] : nullptr;
            if (!r) throw io_error("IoError", "hoop references unknown run " + std::to_string(id));
            s += "    <g data-run=\"" + std::to_string(r->id) + "\" data-thread=\"" +
                 to_string(r->thread) + "\" data-tension=\"" +
                 (r->tension == Tension::pulled ? "pulled" : "floating") + "\" data-face=\"" +
                 std::to_string(r->face) + "\" data-gap=\"" + std::to_string(r->gap) +
                 "\" data-tag=\"" + r->tag + "\" data-pair=\"" + std::to_string(r->pair) + "\">\n";
            if (!r->points.empty()) {
                std::vector<Vec2> line;
                for (const auto& np : r->points) line.push_back(np.pos);
                s += "      <path d=\"" + path_d(line, false) + "\" fill=\"none\" stroke=\"";
                s += thread_color(*r);
                s += "\" stroke-width=\"0.2\"/>\n";
            }
            for (const auto& np : r->points)
                s += "      <circle cx=\"" + fnum(np.pos.x) + "\" cy=\"" + fnum(np.pos.y) +
                     "\" r=\"0.15\" fill=\"" + thread_color(*r) + "\" data-role=\"" +
                     to_string(np.role) + "\"/>\n";
            s += "    </g>\n";
        }
        s += "  </g>\n";
    }
    s += "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("IoError", "cannot write " + path);
    out << s;
    out.flush();
    if (!out.good()) throw io_error("IoError", "short write to " + path);
}

SvgBundle read_svg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("IoError", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    auto tags = scan_tags(text);
    if (tags.empty() || tags[0].name != "svg") bad("not an SVG document");
    const std::string* gen = tags[0].find("data-generator");
    if (!gen || *gen != "stitchfold") bad("foreign SVG: no role encoding present");

    SvgBundle b;
    int fab_squares_claimed = to_int(tags[0].need("data-fab-squares"));
    b.hoops.deps = parse_pairs(tags[0].need("data-hoop-deps"));
    b.prog.deps = parse_pairs(tags[0].need("data-run-deps"));

    enum class Mode { none, cut, hoop };
    Mode mode = Mode::none;
    bool in_run = false;
    std::vector<CutPath> extras;
    for (size_t i = 1; i < tags.size(); ++i) {
        const XTag& t = tags[i];
        if (t.name == "svg") {
            if (!t.closing) bad("nested <svg>");
            continue;
        }
        if (t.name == "g" && !t.closing) {
            if (const std::string* layer = t.find("data-layer")) {
                if (mode != Mode::none) bad("nested layer " + *layer);
                if (*layer == "cut") {
                    mode = Mode::cut;
                } else if (layer->rfind("stitch-hoop-", 0) == 0) {
                    if (to_int(layer->substr(12)) != (int)b.hoops.hoops.size() + 1)
                        bad("hoop layers out of order at " + *layer);
                    mode = Mode::hoop;
                    Hoop hp;
                    std::istringstream bs(t.need("data-box"));
                    std::string tok;
                    std::vector<double> bv;
                    while (bs >> tok) bv.push_back(to_num(tok));
                    if (bv.size() != 4) bad("hoop box needs four numbers");
                    hp.lo = {bv[0], bv[1]};
                    hp.hi = {bv[2], bv[3]};
                    hp.faces = parse_ints(t.need("data-faces"));
                    hp.regs = parse_ints(t.need("data-regs"));
                    b.hoops.hoops.push_back(std::move(hp));
                } else {
                    bad("unknown layer '" + *layer + "'");
                }
            } else if (t.find("data-run")) {
                if (mode != Mode::hoop || in_run) bad("run group outside a hoop layer");
                in_run = true;
                StitchRun r;
                r.id = to_int(t.need("data-run"));
                r.thread = thread_from(t.need("data-thread"));
                const std::string& ten = t.need("data-tension");
                if (ten != "pulled" && ten != "floating") bad("unknown tension '" + ten + "'");
                r.tension = ten == "pulled" ? Tension::pulled : Tension::floating;
                r.face = to_int(t.need("data-face"));
                r.gap = to_int(t.need("data-gap"));
                r.tag = t.need("data-tag");
                r.pair = to_int(t.need("data-pair"));
                b.hoops.hoops.back().runs.push_back(r.id);
                b.prog.runs.push_back(std::move(r));
            } else {
                bad("unexpected group");
            }
            continue;
        }
        if (t.name == "g" && t.closing) {
            if (in_run)
                in_run = false;
            else if (mode != Mode::none)
                mode = Mode::none;
            else
                bad("stray </g>");
            continue;
        }
        if (t.name == "path") {
            if (in_run) continue;  // display polyline; the circles carry the data
            if (mode != Mode::cut) bad("path outside the cut layer");
            CutPath c;
            c.kind = kind_from(t.need("data-kind"));
            auto [pts, closed] = parse_d(t.need("d"));
            c.pts = std::move(pts);
            c.closed = closed;
            c.gap = to_int(t.need("data-gap"));
            c.hole = to_int(t.need("data-hole"));
            if (t.find("data-extra")) {
                if (c.kind != CutPath::Kind::registration_square)
                    bad("only registration squares may be marked extra");
                extras.push_back(std::move(c));
            } else {
                b.fab.cuts.push_back(std::move(c));
            }
            continue;
        }
        if (t.name == "circle") {
            if (!in_run) bad("circle outside a run");
            NeedlePoint np;
            np.pos = {to_num(t.need("cx")), to_num(t.need("cy"))};
            np.role = point_role_from(t.need("data-role"));
            b.prog.runs.back().points.push_back(np);
            continue;
        }
        bad("unexpected element <" + t.name + ">");
    }

    for (const auto& c : b.fab.cuts)
        if (c.kind == CutPath::Kind::registration_square) b.hoops.squares.push_back(c);
    b.hoops.fab_squares = (int)b.hoops.squares.size();
    if (b.hoops.fab_squares != fab_squares_claimed)
        bad("registration square count disagrees with the header");
    for (auto& c : extras) b.hoops.squares.push_back(std::move(c));

    std::stable_sort(b.prog.runs.begin(), b.prog.runs.end(),
                     [](const StitchRun& a, const StitchRun& c) { return a.id < c.id; });
    for (size_t i = 1; i < b.prog.runs.size(); ++i)
        if (b.prog.runs[i].id == b.prog.runs[i - 1].id) bad("duplicate run id");
    return b;
}

Report make_report(const FlatLayout& fl, const std::vector<ResolutionEvent>& log,
                   const HingeSet& hs, const HoopPlan& plan, const Params& p) {
    Report r;
    for (const auto& f : fl.faces)
        if (f.alive) ++r.faces;
    for (const auto& e : log) {
        if (e.action == "absorbed" || e.action == "merged") ++r.merges;
        if (e.action != "skipped") ++r.resolved;
    }
    r.hinge_histogram = hs.histogram;
    r.hoops = (int)plan.hoops.size();
    r.config_echo = dump_config(p);
    return r;
}

std::string report_text(const Report& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "faces %d\nmerges %d\noverlaps resolved %d\nhinges by type %d,%d,%d,%d\n"
                  "hoops %d\n",
                  r.faces, r.merges, r.resolved, r.hinge_histogram[0], r.hinge_histogram[1],
                  r.hinge_histogram[2], r.hinge_histogram[3], r.hoops);
    return std::string(buf) + "-- config --\n" + r.config_echo;
}

std::string report_json(const Report& r) {
    nlohmann::json j;
    j["schema"] = 1;
    j["faces"] = r.faces;
    j["merges"] = r.merges;
    j["overlaps_resolved"] = r.resolved;
    j["hinge_histogram"] = r.hinge_histogram;
    j["hoops"] = r.hoops;
    j["config"] = r.config_echo;
    return j.dump(2) + "\n";
}

}  // namespace stitchfold
