#include "stitchfold/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "stitchfold/errors.hpp"

namespace stitchfold {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

double parse_num(const std::string& v, int line) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        while (pos < v.size() && std::isspace((unsigned char)v[pos])) ++pos;
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw validation_error("ConfigError", "line " + std::to_string(line) +
                                                  ": bad numeric value '" + v + "'");
    }
}

int parse_int(const std::string& v, int line) {
    double x = parse_num(v, line);
    int i = (int)x;
    if ((double)i != x)
        throw validation_error("ConfigError",
                               "line " + std::to_string(line) + ": expected integer, got '" + v + "'");
    return i;
}

// "3-7,7-12,12-3" -> vertex chain {3,7,12,3}; edges must link end to end.
SeamCut parse_cut(const std::string& v, int line) {
    SeamCut cut;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        size_t dash = item.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 >= item.size())
            throw validation_error("ConfigError", "line " + std::to_string(line) +
                                                      ": cut edge must be 'a-b', got '" + item + "'");
        int a = parse_int(trim(item.substr(0, dash)), line);
        int b = parse_int(trim(item.substr(dash + 1)), line);
        if (cut.chain.empty()) {
            cut.chain.push_back(a);
            cut.chain.push_back(b);
        } else {
            if (cut.chain.back() != a)
                throw validation_error("ConfigError",
                                       "line " + std::to_string(line) + ": cut edges do not chain (" +
                                           std::to_string(cut.chain.back()) + " then " + item + ")");
            cut.chain.push_back(b);
        }
    }
    if (cut.chain.size() < 2)
        throw validation_error("ConfigError", "line " + std::to_string(line) + ": empty cut");
    return cut;
}

}  // namespace

Params load_config(std::istream& in) {
    Params p;
    std::map<std::string, std::function<void(const std::string&, int)>> setters;
    auto num = [&](const char* key, double* slot) {
        setters[key] = [slot](const std::string& v, int line) { *slot = parse_num(v, line); };
    };
    num("shrink_ratio", &p.shrink_ratio);
    num("safety_factor", &p.safety_factor);
    num("min_edge", &p.min_edge);
    num("safety_margin", &p.safety_margin);
    num("channel_width", &p.channel_width);
    num("angle_threshold", &p.angle_threshold);
    num("coincidence_tol", &p.coincidence_tol);
    num("gap_min_mm", &p.gap_min_mm);
    num("gap_max_mm", &p.gap_max_mm);
    num("g0_mm", &p.g0_mm);
    num("parallel_tol", &p.parallel_tol);
    num("gap_tol", &p.gap_tol);
    num("straight_pitch_mm", &p.straight_pitch_mm);
    num("hold_pitch_mm", &p.hold_pitch_mm);
    num("anchor_inset_mm", &p.anchor_inset_mm);
    num("corner_clearance_mm", &p.corner_clearance_mm);
    num("lock_inset_mm", &p.lock_inset_mm);
    num("min_span_mm", &p.min_span_mm);
    num("bridge_len_mm", &p.bridge_len_mm);
    num("min_cut_mm", &p.min_cut_mm);
    num("reg_square_mm", &p.reg_square_mm);
    num("tab_width_mm", &p.tab_width_mm);
    num("cut_clearance_mm", &p.cut_clearance_mm);
    num("hoop_margin_mm", &p.hoop_margin_mm);
    setters["max_rounds"] = [&p](const std::string& v, int line) { p.max_rounds = parse_int(v, line); };
    setters["max_iter"] = [&p](const std::string& v, int line) { p.max_iter = parse_int(v, line); };
    setters["seed"] = [&p](const std::string& v, int line) { p.seed = (unsigned)parse_int(v, line); };
    setters["hoop_size"] = [&p](const std::string& v, int line) {
        size_t x = v.find('x');
        if (x == std::string::npos)
            throw validation_error("ConfigError",
                                   "line " + std::to_string(line) + ": hoop_size must be WxH, got '" + v + "'");
        p.hoop_w_mm = parse_num(trim(v.substr(0, x)), line);
        p.hoop_h_mm = parse_num(trim(v.substr(x + 1)), line);
    };
    setters["resolution"] = [&p](const std::string& v, int line) {
        if (v == "reject")
            p.resolution_mode = ResolutionMode::reject;
        else if (v == "autoscale")
            p.resolution_mode = ResolutionMode::autoscale;
        else
            throw validation_error("ConfigError", "line " + std::to_string(line) +
                                                      ": resolution must be reject|autoscale, got '" + v + "'");
    };
    setters["cut"] = [&p](const std::string& v, int line) { p.cuts.push_back(parse_cut(v, line)); };

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.resize(hash);
        std::string s = trim(raw);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw validation_error("ConfigError", "line " + std::to_string(line) + ": expected key=value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end())
            throw validation_error("ConfigError", "line " + std::to_string(line) + ": unknown key '" + key + "'");
        it->second(val, line);
    }
    return p;
}

Params load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("FileNotFound", "cannot open config file: " + path);
    return load_config(in);
}

std::string dump_config(const Params& p) {
    std::ostringstream os;
    auto put = [&](const char* k, double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        os << k << " = " << buf << "\n";
    };
    put("shrink_ratio", p.shrink_ratio);
    put("safety_factor", p.safety_factor);
    put("min_edge", p.min_edge);
    put("safety_margin", p.safety_margin);
    put("channel_width", p.channel_width);
    put("angle_threshold", p.angle_threshold);
    put("coincidence_tol", p.coincidence_tol);
    os << "max_rounds = " << p.max_rounds << "\n";
    put("gap_min_mm", p.gap_min_mm);
    put("gap_max_mm", p.gap_max_mm);
    put("g0_mm", p.g0_mm);
    os << "max_iter = " << p.max_iter << "\n";
    put("parallel_tol", p.parallel_tol);
    put("gap_tol", p.gap_tol);
    os << "seed = " << p.seed << "\n";
    put("straight_pitch_mm", p.straight_pitch_mm);
    put("hold_pitch_mm", p.hold_pitch_mm);
    put("anchor_inset_mm", p.anchor_inset_mm);
    put("corner_clearance_mm", p.corner_clearance_mm);
    put("lock_inset_mm", p.lock_inset_mm);
    put("min_span_mm", p.min_span_mm);
    put("bridge_len_mm", p.bridge_len_mm);
    put("min_cut_mm", p.min_cut_mm);
    put("reg_square_mm", p.reg_square_mm);
    put("tab_width_mm", p.tab_width_mm);
    put("cut_clearance_mm", p.cut_clearance_mm);
    os << "hoop_size = " << p.hoop_w_mm << "x" << p.hoop_h_mm << "\n";
    put("hoop_margin_mm", p.hoop_margin_mm);
    os << "resolution = " << (p.resolution_mode == ResolutionMode::reject ? "reject" : "autoscale") << "\n";
    for (const auto& c : p.cuts) {
        os << "cut = ";
        for (size_t i = 0; i + 1 < c.chain.size(); ++i) {
            if (i) os << ",";
            os << c.chain[i] << "-" << c.chain[i + 1];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace stitchfold
