#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "mhdec/partition.hpp"

namespace mhdec {

namespace {

void num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void str(std::string& out, const std::string& s) {
    out += '"';
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

void nums(std::string& out, std::initializer_list<double> vs) {
    out += '[';
    bool first = true;
    for (double v : vs) {
        if (!first) out += ',';
        first = false;
        num(out, v);
    }
    out += ']';
}

void affine(std::string& out, const AffineMap& m) {
    nums(out, {m.linear[0], m.linear[1], m.linear[2], m.linear[3], m.shift.x, m.shift.y});
}

AffineMap affine_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 6) throw std::runtime_error("affine map must be an array of 6 numbers");
    return AffineMap{{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()},
                     {j[4].get<double>(), j[5].get<double>()}};
}

}  // namespace

std::string partition_to_json(const Partition& p, const RunManifest* manifest) {
    std::string o;
    o.reserve(256 + p.pieces.size() * 160);
    o += "{\n\"version\":";
    str(o, kPartitionSchemaVersion);
    if (manifest) {
        o += ",\n\"manifest\":{\"command\":";
        str(o, manifest->command);
        o += ",\"tool_version\":";
        str(o, manifest->tool_version);
        o += ",\"poly\":";
        str(o, manifest->poly);
        o += ",\"seed\":" + std::to_string(manifest->seed) + ",\"config\":{";
        for (std::size_t i = 0; i < manifest->config.size(); ++i) {
            if (i) o += ',';
            str(o, manifest->config[i].first);
            o += ':';
            str(o, manifest->config[i].second);
        }
        o += "},\n\"timestamp\":";
        str(o, manifest->timestamp);
        o += '}';
    }
    o += ",\n\"poly\":";
    str(o, p.phi.to_string());
    o += ",\n\"delta\":";
    num(o, p.delta);
    o += ",\n\"weights\":[" + std::to_string(p.mh.q) + "," + std::to_string(p.mh.r) + "," + std::to_string(p.mh.s) + "]";
    o += ",\n\"l2_applicable\":";
    o += p.l2_applicable ? "true" : "false";
    const EngineConfig& c = p.config;
    o += ",\n\"config\":{\"c_phi\":";
    num(o, c.c_phi);
    o += ",\"adaptive_c_phi\":";
    o += c.adaptive_c_phi ? "true" : "false";
    o += ",\"C_flat\":";
    num(o, c.C_flat);
    o += ",\"M_bound\":";
    num(o, c.M_bound);
    o += ",\"max_recursion\":" + std::to_string(c.max_recursion);
    o += ",\"verify_inline\":";
    o += c.verify_inline ? "true" : "false";
    o += ",\"seed\":" + std::to_string(c.seed);
    o += ",\"sim_factor\":";
    num(o, c.sim_factor);
    o += ",\"tile_fraction\":";
    num(o, c.tile_fraction);
    o += "},\n\"frames\":[";
    for (std::size_t i = 0; i < p.frames.size(); ++i) {
        if (i) o += ',';
        affine(o, p.frames[i]);
    }
    o += "],\n\"pieces\":[";
    for (std::size_t i = 0; i < p.pieces.size(); ++i) {
        const PartitionPiece& q = p.pieces[i];
        o += i ? ",\n" : "\n";
        o += "{\"tag\":\"";
        o += to_string(q.tag);
        o += "\",\"radial_level\":" + std::to_string(q.radial_level) + ",\"band_level\":" + std::to_string(q.band_level) +
             ",\"sigma\":";
        num(o, q.sigma);
        o += ",\"l_level\":" + std::to_string(q.l_level) + ",\"frame\":" + std::to_string(q.frame) + ",\"shape\":";
        nums(o, {q.shape.origin.x, q.shape.origin.y, q.shape.edge1.x, q.shape.edge1.y, q.shape.edge2.x, q.shape.edge2.y});
        o += '}';
    }
    o += "],\n\"stats\":{\"pieces\":" + std::to_string(p.stats.pieces) + ",\"per_case\":{";
    bool first = true;
    for (const auto& [t, n] : p.stats.per_case) {
        if (!first) o += ',';
        first = false;
        str(o, to_string(t));
        o += ':' + std::to_string(n);
    }
    o += "},\"radial_levels\":" + std::to_string(p.stats.radial_levels) + ",\"c_phi\":";
    num(o, p.stats.c_phi);
    o += ",\"c_phi_halvings\":" + std::to_string(p.stats.c_phi_halvings) + ",\"M_phi\":";
    num(o, p.stats.M_phi);
    o += ",\"components\":[";
    for (std::size_t i = 0; i < p.stats.components.size(); ++i) {
        const auto& cp = p.stats.components[i];
        if (i) o += ',';
        o += "{\"kind\":";
        str(o, cp.kind);
        o += ",\"quadrant\":" + std::to_string(cp.quadrant) + ",\"case\":\"" + to_string(cp.tag) +
             "\",\"k\":" + std::to_string(cp.k) + ",\"lambda\":";
        num(o, cp.lambda);
        o += '}';
    }
    o += "],\"warnings\":[";
    for (std::size_t i = 0; i < p.stats.warnings.size(); ++i) {
        if (i) o += ',';
        str(o, p.stats.warnings[i]);
    }
    o += "]}\n}\n";
    return o;
}

Partition partition_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("partition JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<std::string>() != kPartitionSchemaVersion)
            throw std::runtime_error("partition JSON: unsupported version " + j.at("version").get<std::string>());
        Partition p;
        p.phi = parse_poly(j.at("poly").get<std::string>());
        p.delta = j.at("delta").get<double>();
        const auto& w = j.at("weights");
        p.mh = MixedHomogeneity{w.at(0).get<int>(), w.at(1).get<int>(), w.at(2).get<int>()};
        p.l2_applicable = j.at("l2_applicable").get<bool>();
        const auto& c = j.at("config");
        p.config.c_phi = c.at("c_phi").get<double>();
        p.config.adaptive_c_phi = c.at("adaptive_c_phi").get<bool>();
        p.config.C_flat = c.at("C_flat").get<double>();
        p.config.M_bound = c.at("M_bound").get<double>();
        p.config.max_recursion = c.at("max_recursion").get<int>();
        p.config.verify_inline = c.at("verify_inline").get<bool>();
        p.config.seed = c.at("seed").get<std::uint64_t>();
        p.config.sim_factor = c.at("sim_factor").get<double>();
        p.config.tile_fraction = c.at("tile_fraction").get<double>();
        for (const auto& f : j.at("frames")) p.frames.push_back(affine_from(f));
        for (const auto& q : j.at("pieces")) {
            PartitionPiece pc;
            auto tag = case_tag_from_string(q.at("tag").get<std::string>());
            if (!tag) throw std::runtime_error("partition JSON: unknown case tag");
            pc.tag = *tag;
            pc.radial_level = q.at("radial_level").get<int>();
            pc.band_level = q.at("band_level").get<int>();
            pc.sigma = q.at("sigma").get<double>();
            pc.l_level = q.at("l_level").get<int>();
            pc.frame = q.at("frame").get<int>();
            if (pc.frame < 0 || pc.frame >= static_cast<int>(p.frames.size()))
                throw std::runtime_error("partition JSON: frame index out of range");
            const auto& s = q.at("shape");
            if (!s.is_array() || s.size() != 6) throw std::runtime_error("partition JSON: shape must have 6 numbers");
            pc.shape = Parallelogram{{s[0].get<double>(), s[1].get<double>()},
                                     {s[2].get<double>(), s[3].get<double>()},
                                     {s[4].get<double>(), s[5].get<double>()}};
            p.pieces.push_back(pc);
        }
        const auto& st = j.at("stats");
        p.stats.pieces = p.pieces.size();
        for (const auto& [k, v] : st.at("per_case").items()) {
            auto tag = case_tag_from_string(k);
            if (tag) p.stats.per_case[*tag] = v.get<std::size_t>();
        }
        p.stats.radial_levels = st.at("radial_levels").get<int>();
        p.stats.c_phi = st.at("c_phi").get<double>();
        p.stats.c_phi_halvings = st.at("c_phi_halvings").get<int>();
        p.stats.M_phi = st.at("M_phi").get<double>();
        for (const auto& w2 : st.at("warnings")) p.stats.warnings.push_back(w2.get<std::string>());
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("partition JSON: ") + e.what());
    } catch (const ParseError& e) {
        throw std::runtime_error(std::string("partition JSON: bad polynomial: ") + e.what());
    }
}

std::string partition_to_svg(const Partition& p) {
    static const char* colors[] = {"#555555", "#4c72b0", "#dd8452", "#937860", "#55a868", "#c44e52", "#8172b3"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.05 -1.05 2.1 2.1\" width=\"800\" height=\"800\">\n";
    os << "<rect x=\"-1\" y=\"-1\" width=\"2\" height=\"2\" fill=\"none\" stroke=\"black\" stroke-width=\"0.004\"/>\n";
    for (const auto& q : p.pieces) {
        os << "<path d=\"" << svg_path(q.shape) << "\" fill=\"" << colors[static_cast<int>(q.tag)]
           << "\" fill-opacity=\"0.25\" stroke=\"" << colors[static_cast<int>(q.tag)]
           << "\" stroke-width=\"0.0008\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace mhdec
