#include "latinv/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "latinv/version.hpp"

namespace latinv {

namespace {

std::string u64_str(uint64_t v) { return std::to_string(v); }

uint64_t parse_u64(const json& j, const char* what) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument(std::string("expected unsigned decimal for ") + what);
        return std::stoull(s);
    }
    if (j.is_number_unsigned()) return j.get<uint64_t>();
    if (j.is_number_integer() && j.get<int64_t>() >= 0) return uint64_t(j.get<int64_t>());
    throw std::invalid_argument(std::string("expected unsigned integer for ") + what);
}

Prob64 parse_prob(const json& j, const char* what) {
    if (j.is_string()) return parse_unit_decimal(j.get<std::string>());
    if (j.is_number()) {
        const double p = j.get<double>();
        if (p < 0 || p > 1)
            throw std::invalid_argument(std::string(what) + ": probability outside [0,1]");
        return Prob64::from_unit((long double)p);
    }
    if (j.is_object() && j.contains("frac64"))
        return Prob64{parse_u64(j.at("frac64"), what), false};
    throw std::invalid_argument(std::string(what) + ": expected number, decimal string or frac64");
}

json prob_to_json(Prob64 p) {
    if (p.one) return json("1");
    return json{{"frac64", u64_str(p.thr)}};
}

TorusInterval parse_interval(const json& j) {
    if (j.is_array() && j.size() == 2) {
        // endpoints as decimals or decimal strings
        auto unit = [](const json& v) -> long double {
            if (v.is_string()) return parse_unit_decimal(v.get<std::string>()).unit();
            return (long double)v.get<double>();
        };
        return TorusInterval::closed_open(unit(j[0]), unit(j[1]));
    }
    if (j.is_object()) {
        TorusInterval iv;
        if (j.value("full", false)) return TorusInterval::circle();
        iv.lo = parse_u64(j.at("lo64"), "interval lo64");
        iv.len = parse_u64(j.at("len64"), "interval len64");
        return iv;
    }
    throw std::invalid_argument("window interval: expected [a,b] or {lo64,len64}");
}

json interval_to_json(const TorusInterval& iv) {
    if (iv.full) return json{{"full", true}};
    return json{{"lo64", u64_str(iv.lo)}, {"len64", u64_str(iv.len)}};
}

} // namespace

json window_to_json(const WindowFn& w) {
    struct V {
        json operator()(const BoxWindow& b) const {
            json arr = json::array();
            for (const auto& iv : b.intervals) arr.push_back(interval_to_json(iv));
            return json{{"box", arr}};
        }
        json operator()(const ConstWindow& c) const { return json{{"constant", prob_to_json(c.p)}}; }
        json operator()(const TableWindow& t) const {
            json vals = json::array();
            for (const auto& p : t.values) vals.push_back(prob_to_json(p));
            return json{{"table", json{{"m", t.m}, {"depth", t.depth}, {"values", vals}}}};
        }
    };
    return std::visit(V{}, w.variant());
}

WindowFn window_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("window: expected object");
    if (j.contains("box")) {
        std::vector<TorusInterval> ivs;
        for (const auto& e : j.at("box")) ivs.push_back(parse_interval(e));
        return WindowFn::box(std::move(ivs));
    }
    if (j.contains("constant")) return WindowFn(ConstWindow{parse_prob(j.at("constant"), "constant")});
    if (j.contains("table")) {
        const auto& t = j.at("table");
        std::vector<Prob64> vals;
        for (const auto& e : t.at("values")) vals.push_back(parse_prob(e, "table value"));
        return WindowFn::table(t.at("m").get<int>(), t.at("depth").get<int>(), std::move(vals));
    }
    throw std::invalid_argument("window: need one of box/constant/table");
}

json affine_to_json(const AffineMap& g) {
    const int d = g.dim();
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int j2 = 0; j2 < d; ++j2) row.push_back(g.linear.at(i, j2));
        rows.push_back(row);
    }
    return json{{"A", rows}, {"v", g.shift}};
}

AffineMap affine_from_json(const json& j) {
    const auto& rows = j.at("A");
    const int d = int(rows.size());
    IntMat m;
    m.n = d;
    m.a.resize(size_t(d) * d);
    for (int i = 0; i < d; ++i) {
        if (int(rows[size_t(i)].size()) != d)
            throw std::invalid_argument("affine map: A must be square");
        for (int c = 0; c < d; ++c) m.at(i, c) = rows[size_t(i)][size_t(c)].get<int64_t>();
    }
    LatticePoint v = j.value("v", LatticePoint(size_t(d), 0));
    if (int(v.size()) != d) throw std::invalid_argument("affine map: v dimension mismatch");
    return AffineMap(LatticeMatrix(std::move(m)), std::move(v));
}

namespace {

std::string index_key(const MultiIndex& idx) {
    std::string s = "(";
    for (size_t i = 0; i < idx.e.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(idx.e[i]);
    }
    s += ")";
    return s;
}

MultiIndex parse_index_key(const std::string& s, int d) {
    MultiIndex idx;
    if (s.size() < 2 || s.front() != '(' || s.back() != ')')
        throw std::invalid_argument("polymap: bad index key " + s);
    std::stringstream ss(s.substr(1, s.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) idx.e.push_back(uint32_t(std::stoul(tok)));
    if (int(idx.e.size()) != d) throw std::invalid_argument("polymap: index arity mismatch " + s);
    return idx;
}

} // namespace

json polymap_to_json(const PolyMap& p) {
    const auto& basis = monomial_basis_cached(p.d, p.k);
    json coeffs = json::object();
    for (size_t a = 0; a < basis.size(); ++a) {
        json vec = json::array();
        for (int j = 0; j < p.m; ++j) vec.push_back(u64_str(p.coeffs[a][size_t(j)].frac));
        coeffs[index_key(basis[a])] = vec;
    }
    return json{{"d", p.d}, {"m", p.m}, {"k", p.k}, {"coeffs", coeffs}};
}

PolyMap polymap_from_json(const json& j) {
    const int d = j.at("d").get<int>();
    const int m = j.at("m").get<int>();
    const int k = j.at("k").get<int>();
    PolyMap p = PolyMap::zero(d, m, k);
    for (const auto& [key, val] : j.at("coeffs").items()) {
        const size_t a = basis_index(d, k, parse_index_key(key, d));
        if (int(val.size()) != m) throw std::invalid_argument("polymap: coefficient arity mismatch");
        for (int c = 0; c < m; ++c) p.coeffs[a][size_t(c)] = TorusElem{parse_u64(val[size_t(c)], "coeff")};
    }
    return p;
}

json box_to_json(const Box& b) { return json{{"lo", b.lo}, {"hi", b.hi}}; }

Box box_from_json(const json& j) {
    return Box(j.at("lo").get<std::vector<int64_t>>(), j.at("hi").get<std::vector<int64_t>>());
}

// --- process nodes -----------------------------------------------------------

namespace {

json node_to_json(const ProcessNode& n) {
    struct V {
        json operator()(const BernoulliSpec& s) const {
            return json{{"type", "bernoulli"}, {"p", prob_to_json(s.p)}};
        }
        json operator()(const PeriodicSpec& s) const {
            json out{{"type", "periodic"}, {"n", s.modulus}};
            if (!s.pattern.empty()) out["pattern"] = s.pattern;
            return out;
        }
        json operator()(const PolynomialSpec& s) const {
            json out{{"type", "polynomial"}, {"d", s.d}, {"m", s.m},       {"k", s.k},
                     {"window", window_to_json(s.window)}};
            switch (s.filter) {
            case DegreeFilter::AtMostK: out["degree_filter"] = "at_most_k"; break;
            case DegreeFilter::TopDegreeOnly: out["degree_filter"] = "top_degree"; break;
            case DegreeFilter::Custom:
                out["degree_filter"] = "custom";
                out["custom_indices"] = s.custom_indices;
                break;
            }
            switch (s.subgroup.kind) {
            case CoeffSubgroup::Kind::Full: out["subgroup"] = json{{"kind", "full"}}; break;
            case CoeffSubgroup::Kind::CoordinateSubtorus:
                out["subgroup"] = json{{"kind", "coordinate"}, {"active", s.subgroup.active_coords}};
                break;
            case CoeffSubgroup::Kind::Dyadic:
                out["subgroup"] = json{{"kind", "dyadic"}, {"level", s.subgroup.dyadic_level}};
                break;
            }
            if (s.coeff_action_gen) {
                json rows = json::array();
                for (int i = 0; i < s.coeff_action_gen->n; ++i) {
                    json row = json::array();
                    for (int c = 0; c < s.coeff_action_gen->n; ++c)
                        row.push_back(s.coeff_action_gen->at(i, c));
                    rows.push_back(row);
                }
                out["coeff_action"] = rows;
            }
            return out;
        }
        json operator()(const CutProjectSpec& s) const {
            return json{{"type", "cut_project"},
                        {"d", s.d},
                        {"m_total", s.m_total},
                        {"window", json::array({s.window_lo, s.window_lo + s.window_len})}};
        }
        json operator()(const UnionSpec& s) const {
            return json{{"type", "union"}, {"left", node_to_json(*s.left)}, {"right", node_to_json(*s.right)}};
        }
        json operator()(const IntersectSpec& s) const {
            return json{{"type", "intersect"}, {"left", node_to_json(*s.left)}, {"right", node_to_json(*s.right)}};
        }
        json operator()(const ThinSpec& s) const {
            return json{{"type", "thin"}, {"inner", node_to_json(*s.inner)}, {"q", prob_to_json(s.keep)}};
        }
        json operator()(const ImageSpec& s) const {
            return json{{"type", "image"}, {"inner", node_to_json(*s.inner)}, {"g", affine_to_json(s.map)}};
        }
    };
    return std::visit(V{}, n.v);
}

ProcessNode node_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "bernoulli") {
        if (!j.contains("p")) throw std::invalid_argument("bernoulli: missing field p");
        return ProcessNode{BernoulliSpec{parse_prob(j.at("p"), "p")}};
    }
    if (type == "periodic") {
        PeriodicSpec s;
        s.modulus = j.at("n").get<int64_t>();
        if (s.modulus < 1) throw std::invalid_argument("periodic: field n must be >= 1");
        if (j.contains("pattern")) s.pattern = j.at("pattern").get<std::vector<std::vector<int64_t>>>();
        return ProcessNode{std::move(s)};
    }
    if (type == "polynomial") {
        PolynomialSpec s;
        s.d = j.at("d").get<int>();
        s.m = j.value("m", 1);
        s.k = j.at("k").get<int>();
        if (s.d < 1 || s.m < 1 || s.k < 0)
            throw std::invalid_argument("polynomial: fields d, m must be >= 1 and k >= 0");
        s.window = window_from_json(j.at("window"));
        const std::string f = j.value("degree_filter", std::string("at_most_k"));
        if (f == "at_most_k") s.filter = DegreeFilter::AtMostK;
        else if (f == "top_degree") s.filter = DegreeFilter::TopDegreeOnly;
        else if (f == "custom") {
            s.filter = DegreeFilter::Custom;
            s.custom_indices = j.at("custom_indices").get<std::vector<size_t>>();
        } else throw std::invalid_argument("polynomial: unknown degree_filter " + f);
        if (j.contains("subgroup")) {
            const auto& g = j.at("subgroup");
            const std::string kind = g.at("kind").get<std::string>();
            if (kind == "full") s.subgroup.kind = CoeffSubgroup::Kind::Full;
            else if (kind == "coordinate") {
                s.subgroup.kind = CoeffSubgroup::Kind::CoordinateSubtorus;
                s.subgroup.active_coords = g.at("active").get<std::vector<uint8_t>>();
            } else if (kind == "dyadic") {
                s.subgroup.kind = CoeffSubgroup::Kind::Dyadic;
                s.subgroup.dyadic_level = g.at("level").get<int>();
            } else throw std::invalid_argument("polynomial: unknown subgroup kind " + kind);
        }
        if (j.contains("coeff_action")) {
            const auto& rows = j.at("coeff_action");
            IntMat m;
            m.n = int(rows.size());
            m.a.resize(size_t(m.n) * m.n);
            for (int i = 0; i < m.n; ++i)
                for (int c = 0; c < m.n; ++c) m.at(i, c) = rows[size_t(i)][size_t(c)].get<int64_t>();
            s.coeff_action_gen = std::move(m);
        }
        return ProcessNode{std::move(s)};
    }
    if (type == "cut_project") {
        CutProjectSpec s;
        s.d = j.at("d").get<int>();
        s.m_total = j.value("m_total", s.d + 1);
        const auto& w = j.at("window");
        const double lo = w[0].get<double>(), hi = w[1].get<double>();
        if (!(lo >= 0 && lo < 1 && hi >= lo && hi <= 1))
            throw std::invalid_argument("cut_project: field window must satisfy 0 <= lo <= hi <= 1");
        s.window_lo = lo;
        s.window_len = hi - lo;
        return ProcessNode{s};
    }
    if (type == "union" || type == "intersect") {
        auto l = std::make_unique<ProcessNode>(node_from_json(j.at("left")));
        auto r = std::make_unique<ProcessNode>(node_from_json(j.at("right")));
        if (type == "union") return ProcessNode{UnionSpec{std::move(l), std::move(r)}};
        return ProcessNode{IntersectSpec{std::move(l), std::move(r)}};
    }
    if (type == "thin") {
        auto inner = std::make_unique<ProcessNode>(node_from_json(j.at("inner")));
        return ProcessNode{ThinSpec{std::move(inner), parse_prob(j.at("q"), "q")}};
    }
    if (type == "image") {
        auto inner = std::make_unique<ProcessNode>(node_from_json(j.at("inner")));
        return ProcessNode{ImageSpec{std::move(inner), affine_from_json(j.at("g"))}};
    }
    throw std::invalid_argument("unknown process type: " + type);
}

} // namespace

json spec_to_json(const ProcessSpec& spec) {
    return json{{"seed", spec.seed}, {"process", node_to_json(spec.root)}};
}

ProcessSpec spec_from_json(const json& j) {
    ProcessSpec s;
    s.seed = j.value("seed", uint64_t(0));
    s.root = node_from_json(j.at("process"));
    return s;
}

ProcessSpec spec_from_preset(const std::string& name, uint64_t seed) {
    auto poly = [&](int d, int k, long double delta) {
        PolynomialSpec s;
        s.d = d;
        s.m = 1;
        s.k = k;
        s.window = WindowFn::box1(0.0L, delta);
        return ProcessSpec(ProcessNode{std::move(s)}, seed);
    };
    if (name == "s1") return poly(2, 1, 0.5L);
    if (name == "s2") return poly(2, 2, 0.5L);
    if (name == "s3") return poly(2, 3, 0.5L);
    if (name == "cutproject-s1") {
        CutProjectSpec s;
        s.d = 2;
        s.m_total = 3;
        s.window_lo = 0.0;
        s.window_len = 0.5;
        return ProcessSpec(ProcessNode{s}, seed);
    }
    if (name.rfind("poly:", 0) == 0) {
        int d = 0, k = 0;
        double delta = 0;
        if (std::sscanf(name.c_str() + 5, "%d,%d,%lf", &d, &k, &delta) != 3 || d < 1 || k < 0 ||
            delta < 0 || delta > 1)
            throw std::invalid_argument("preset poly:<d>,<k>,<delta> is malformed: " + name);
        return poly(d, k, (long double)delta);
    }
    if (name.rfind("bernoulli:", 0) == 0) {
        return ProcessSpec(
            ProcessNode{BernoulliSpec{parse_unit_decimal(name.substr(10))}}, seed);
    }
    if (name.rfind("periodic:", 0) == 0) {
        PeriodicSpec s;
        s.modulus = std::stoll(name.substr(9));
        if (s.modulus < 1) throw std::invalid_argument("periodic preset: modulus must be >= 1");
        return ProcessSpec(ProcessNode{std::move(s)}, seed);
    }
    throw std::invalid_argument("unknown preset: " + name);
}

// --- TOML subset -------------------------------------------------------------

namespace {

struct TomlParser {
    const std::string& text;
    size_t pos = 0;
    size_t line = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
    }

    void skip_ws_inline() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    void skip_to_eol() {
        while (pos < text.size() && text[pos] != '\n') ++pos;
    }
    bool at_eol() {
        skip_ws_inline();
        return pos >= text.size() || text[pos] == '\n' || text[pos] == '#';
    }
    void consume_eol() {
        skip_ws_inline();
        if (pos < text.size() && text[pos] == '#') skip_to_eol();
        if (pos < text.size()) {
            if (text[pos] != '\n') fail("trailing characters");
            ++pos;
            ++line;
        }
    }

    std::string parse_key() {
        skip_ws_inline();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum((unsigned char)text[pos]) || text[pos] == '_' || text[pos] == '-'))
            ++pos;
        if (pos == start) fail("expected key");
        return text.substr(start, pos - start);
    }

    json parse_value() {
        skip_ws_inline();
        if (pos >= text.size()) fail("expected value");
        const char c = text[pos];
        if (c == '"') {
            ++pos;
            std::string s;
            while (pos < text.size() && text[pos] != '"') {
                if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
                s += text[pos++];
            }
            if (pos >= text.size()) fail("unterminated string");
            ++pos;
            return json(s);
        }
        if (c == '[') {
            ++pos;
            json arr = json::array();
            skip_ws_inline();
            // allow newlines inside arrays
            auto skip_filler = [&]() {
                while (pos < text.size()) {
                    if (text[pos] == ' ' || text[pos] == '\t') ++pos;
                    else if (text[pos] == '\n') { ++pos; ++line; }
                    else if (text[pos] == '#') skip_to_eol();
                    else break;
                }
            };
            skip_filler();
            if (pos < text.size() && text[pos] == ']') { ++pos; return arr; }
            while (true) {
                arr.push_back(parse_value());
                skip_filler();
                if (pos < text.size() && text[pos] == ',') { ++pos; skip_filler(); continue; }
                if (pos < text.size() && text[pos] == ']') { ++pos; break; }
                fail("expected ',' or ']' in array");
            }
            return arr;
        }
        if (text.compare(pos, 4, "true") == 0) { pos += 4; return json(true); }
        if (text.compare(pos, 5, "false") == 0) { pos += 5; return json(false); }
        // number
        size_t start = pos;
        if (text[pos] == '+' || text[pos] == '-') ++pos;
        bool is_float = false;
        while (pos < text.size() &&
               (std::isdigit((unsigned char)text[pos]) || text[pos] == '.' || text[pos] == 'e' ||
                text[pos] == 'E' || text[pos] == '+' || text[pos] == '-')) {
            if (text[pos] == '.' || text[pos] == 'e' || text[pos] == 'E') is_float = true;
            ++pos;
        }
        if (pos == start) fail("expected value");
        const std::string tok = text.substr(start, pos - start);
        try {
            if (is_float) return json(std::stod(tok));
            return json(std::stoll(tok));
        } catch (const std::exception&) {
            fail("malformed number '" + tok + "'");
        }
    }

    json parse() {
        json root = json::object();
        json* table = &root;
        while (pos < text.size()) {
            skip_ws_inline();
            if (pos >= text.size()) break;
            if (text[pos] == '\n') { ++pos; ++line; continue; }
            if (text[pos] == '#') { skip_to_eol(); continue; }
            if (text[pos] == '[') {
                ++pos;
                table = &root;
                while (true) {
                    const std::string part = parse_key();
                    table = &(*table)[part];
                    if (!table->is_object() && !table->is_null()) fail("table path collides with value");
                    if (table->is_null()) *table = json::object();
                    skip_ws_inline();
                    if (pos < text.size() && text[pos] == '.') { ++pos; continue; }
                    break;
                }
                if (pos >= text.size() || text[pos] != ']') fail("expected ']' after table name");
                ++pos;
                consume_eol();
                continue;
            }
            const std::string key = parse_key();
            skip_ws_inline();
            if (pos >= text.size() || text[pos] != '=') fail("expected '=' after key '" + key + "'");
            ++pos;
            (*table)[key] = parse_value();
            consume_eol();
        }
        return root;
    }
};

} // namespace

json parse_config_text(const std::string& text) {
    // sniff: JSON starts with '{' after whitespace
    for (char c : text) {
        if (std::isspace((unsigned char)c)) continue;
        if (c == '{') return json::parse(text);
        break;
    }
    TomlParser p{text};
    return p.parse();
}

json load_config_file(const std::string& path) { return parse_config_text(read_file(path)); }

// --- hashing / emission --------------------------------------------------------

uint64_t fnv1a64(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t config_hash(const json& j) {
    const std::string s = j.dump();
    return fnv1a64(s.data(), s.size());
}

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

std::string meta_comment(uint64_t seed, uint64_t cfg_hash) {
    return "seed=" + std::to_string(seed) + " config=" + hex64(cfg_hash) + " version=" + kVersion;
}

std::string pbm_bytes(const PointSet& s, const std::string& meta) {
    if (s.box().dim() != 2)
        throw std::invalid_argument("pbm output needs a 2-D point set (slice first)");
    const int64_t h = s.box().extent(0);
    const int64_t w = s.box().extent(1);
    std::string out = "P4\n# " + meta + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n";
    const int64_t row_bytes = (w + 7) / 8;
    std::string data(size_t(h * row_bytes), '\0');
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            const uint64_t idx = uint64_t(y) * uint64_t(w) + uint64_t(x);
            if (s.bit(idx))
                data[size_t(y * row_bytes + x / 8)] |= char(0x80u >> (x % 8));
        }
    return out + data;
}

PointSet slice2d(const PointSet& s, int axis, int64_t value) {
    const int d = s.box().dim();
    if (d < 2) throw std::invalid_argument("slice2d: set dimension must be >= 2");
    if (d == 2) return s;
    if (axis < 0 || axis >= d) throw std::invalid_argument("slice2d: axis out of range");
    std::vector<int> keep;
    for (int i = 0; i < d; ++i)
        if (i != axis) keep.push_back(i);
    // keep the last two remaining axes; fix all others at their low edge
    const int a0 = keep[keep.size() - 2], a1 = keep[keep.size() - 1];
    Box out({s.box().lo[size_t(a0)], s.box().lo[size_t(a1)]},
            {s.box().hi[size_t(a0)], s.box().hi[size_t(a1)]});
    std::vector<uint8_t> bytes(size_t(out.volume()));
    LatticePoint t((size_t)(d));
    for (int i = 0; i < d; ++i) t[size_t(i)] = s.box().lo[size_t(i)];
    t[size_t(axis)] = value;
    uint64_t w = 0;
    for (int64_t x0 = out.lo[0]; x0 < out.hi[0]; ++x0)
        for (int64_t x1 = out.lo[1]; x1 < out.hi[1]; ++x1) {
            t[size_t(a0)] = x0;
            t[size_t(a1)] = x1;
            bytes[w++] = s.contains(t) ? 1 : 0;
        }
    return PointSet::pack(out, bytes);
}

std::string panel_pbm_bytes(const std::vector<PointSet>& panels, const std::string& meta) {
    if (panels.empty()) throw std::invalid_argument("panel: empty list");
    const int64_t h = panels[0].box().extent(0);
    const int64_t w = panels[0].box().extent(1);
    for (const auto& p : panels) {
        if (p.box().dim() != 2) throw std::invalid_argument("panel: panels must be 2-D");
        if (p.box().extent(0) != h || p.box().extent(1) != w)
            throw std::invalid_argument("panel: panels must share the same shape");
    }
    const int64_t gap = 2;
    const int64_t total_w = w * int64_t(panels.size()) + gap * int64_t(panels.size() - 1);
    std::string out =
        "P4\n# " + meta + "\n" + std::to_string(total_w) + " " + std::to_string(h) + "\n";
    const int64_t row_bytes = (total_w + 7) / 8;
    std::string data(size_t(h * row_bytes), '\0');
    for (size_t pi = 0; pi < panels.size(); ++pi) {
        const int64_t x_off = int64_t(pi) * (w + gap);
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                const uint64_t idx = uint64_t(y) * uint64_t(w) + uint64_t(x);
                if (panels[pi].bit(idx)) {
                    const int64_t gx = x_off + x;
                    data[size_t(y * row_bytes + gx / 8)] |= char(0x80u >> (gx % 8));
                }
            }
    }
    return out + data;
}

std::string csv_points_bytes(const PointSet& s, const std::string& meta) {
    std::string out = "# " + meta + "\n";
    const int d = s.box().dim();
    for (int i = 0; i < d; ++i) out += (i ? ",x" : "x") + std::to_string(i);
    out += "\n";
    const uint64_t vol = uint64_t(s.box().volume());
    for (uint64_t i = 0; i < vol; ++i) {
        if (!s.bit(i)) continue;
        const LatticePoint t = s.box().point_at(i);
        for (int c = 0; c < d; ++c) {
            if (c) out += ",";
            out += std::to_string(t[size_t(c)]);
        }
        out += "\n";
    }
    return out;
}

namespace {
void append_le(std::string& s, uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) s += char((v >> (8 * i)) & 0xff);
}
} // namespace

std::string raw_grid_bytes(const PointSet& s, uint64_t seed, uint64_t cfg_hash) {
    std::string out = "LATINVG1";
    append_le(out, uint64_t(uint32_t(s.box().dim())), 4);
    append_le(out, 0, 4);
    for (int i = 0; i < s.box().dim(); ++i) {
        append_le(out, uint64_t(s.box().lo[size_t(i)]), 8);
        append_le(out, uint64_t(s.box().hi[size_t(i)]), 8);
    }
    append_le(out, seed, 8);
    append_le(out, cfg_hash, 8);
    for (uint64_t w : s.words()) append_le(out, w, 8);
    return out;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json report_skeleton(const std::string& command, uint64_t seed, const json& config) {
    return json{{"schema_version", kReportSchemaVersion},
                {"version", kVersion},
                {"command", command},
                {"seed", seed},
                {"config", config},
                {"config_hash", hex64(config_hash(config))}};
}

} // namespace latinv
