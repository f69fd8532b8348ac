#include "cpi/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cpi {

namespace {

struct Entry {
    std::string value;
    int line;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return s.front() != '.' && s.back() != '.';
}

// Drops a comment: '#' at the start or after whitespace, outside quotes.
std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
            return line.substr(0, i);
    }
    return line;
}

std::map<std::string, Entry> tokenize(std::string_view text) {
    std::map<std::string, Entry> out;
    std::string section;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++number;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(number, "unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name) || name.find('.') != std::string_view::npos)
                throw ParseError(number, "bad section name '" + std::string(name) + "'");
            section = std::string(name);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(number, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (!valid_name(key)) throw ParseError(number, "bad key '" + std::string(key) + "'");
        if (value.empty()) throw ParseError(number, "missing value for '" + std::string(key) + "'");
        if (value.front() == '"') {
            if (value.size() < 2 || value.back() != '"') throw ParseError(number, "unterminated string");
            value = value.substr(1, value.size() - 2);
        }
        std::string path = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (path.find('.') == std::string::npos) throw ParseError(number, "key '" + path + "' is outside any section");
        if (!out.emplace(path, Entry{std::string(value), number}).second)
            throw ParseError(number, "duplicate key '" + path + "'");
    }
    return out;
}

// Typed access to the tokenized entries with aggregated diagnostics.
class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has_section(const std::string& name) const {
        const auto it = entries_.lower_bound(name + ".");
        return it != entries_.end() && it->first.rfind(name + ".", 0) == 0;
    }
    bool has(const std::string& path) const { return entries_.count(path) != 0; }

    std::optional<std::string> text(const std::string& path) {
        const auto it = entries_.find(path);
        if (it == entries_.end()) return std::nullopt;
        used_.insert(path);
        return it->second.value;
    }

    std::optional<double> number(const std::string& path) {
        const auto s = text(path);
        if (!s) return std::nullopt;
        double v = 0;
        const auto [end, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
        if (ec != std::errc() || end != s->data() + s->size() || !std::isfinite(v)) {
            fail(path, "expected a finite number, got '" + *s + "'");
            return std::nullopt;
        }
        return v;
    }

    template <typename Int>
    std::optional<Int> integer(const std::string& path) {
        const auto s = text(path);
        if (!s) return std::nullopt;
        Int v = 0;
        const auto [end, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
        if (ec != std::errc() || end != s->data() + s->size()) {
            fail(path, "expected an integer, got '" + *s + "'");
            return std::nullopt;
        }
        return v;
    }

    template <typename E>
    std::optional<E> choice(const std::string& path, const std::vector<std::pair<std::string, E>>& options) {
        const auto s = text(path);
        if (!s) return std::nullopt;
        for (const auto& [name, value] : options)
            if (name == *s) return value;
        std::string names;
        for (const auto& o : options) names += (names.empty() ? "" : ", ") + o.first;
        fail(path, "expected one of {" + names + "}, got '" + *s + "'");
        return std::nullopt;
    }

    std::optional<double> positive(const std::string& path) {
        const auto v = number(path);
        if (v && !(*v > 0.0)) {
            fail(path, "must be > 0");
            return std::nullopt;
        }
        return v;
    }

    void require(const std::string& path) {
        if (!has(path)) fail(path, "required");
    }
    void forbid(const std::string& path, const std::string& why) {
        if (has(path)) {
            used_.insert(path);
            fail(path, why);
        }
    }

    void fail(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

    void finish() {
        for (const auto& [path, entry] : entries_)
            if (!used_.count(path)) errors_.push_back(path + ": unknown key (line " + std::to_string(entry.line) + ")");
        if (errors_.empty()) return;
        std::string msg = "invalid config";
        for (const auto& e : errors_) msg += "\n  " + e;
        throw ValidationError(msg);
    }

private:
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

GeometryConfig read_geometry(Reader& r) {
    GeometryConfig g;
    for (const char* k : {"geometry.z_a", "geometry.z_b", "geometry.S_o", "geometry.lambda0"}) r.require(k);
    g.z_a = r.positive("geometry.z_a").value_or(0);
    g.z_b = r.positive("geometry.z_b").value_or(0);
    g.source_to_lens = r.positive("geometry.S_o").value_or(0);
    g.lambda0 = r.positive("geometry.lambda0").value_or(0);
    g.focal_length = r.positive("geometry.F");
    g.lens_to_sensor = r.positive("geometry.S_i");
    if (r.has("geometry.F") == r.has("geometry.S_i")) r.fail("geometry.F", "give exactly one of geometry.F and geometry.S_i");
    if (g.z_b > 0 && g.source_to_lens > 0 && !(g.z_b < g.source_to_lens))
        r.fail("geometry.z_b", "object must sit before the lens (z_b < S_o)");
    if (g.focal_length && g.source_to_lens > 0 && !(g.source_to_lens > *g.focal_length))
        r.fail("geometry.F", "S_o must exceed F for a real image");
    return g;
}

SourceConfig read_source(Reader& r) {
    SourceConfig s;
    r.require("source.kind");
    s.kind = r.choice<SourceKind>("source.kind", {{"gaussian", SourceKind::gaussian}, {"tophat", SourceKind::tophat}})
                 .value_or(SourceKind::gaussian);
    if (s.kind == SourceKind::gaussian) {
        r.require("source.sigma");
        s.sigma = r.positive("source.sigma");
        r.forbid("source.width", "only for tophat sources");
    } else {
        r.require("source.width");
        s.width = r.positive("source.width");
        r.forbid("source.sigma", "only for gaussian sources");
    }
    return s;
}

ObjectConfig read_object(Reader& r) {
    ObjectConfig o;
    r.require("object.kind");
    o.kind = r.choice<MaskKind>("object.kind", {{"double_slit", MaskKind::double_slit},
                                                {"single_slit", MaskKind::single_slit},
                                                {"sampled", MaskKind::sampled}})
                 .value_or(MaskKind::double_slit);
    switch (o.kind) {
        case MaskKind::double_slit:
            r.require("object.slit_width");
            r.require("object.separation");
            o.slit_width = r.positive("object.slit_width");
            o.separation = r.positive("object.separation");
            if (o.slit_width && o.separation && !(*o.separation > *o.slit_width))
                r.fail("object.separation", "slits overlap (separation <= slit_width)");
            for (const char* k : {"object.center", "object.file", "object.feature_scale"})
                r.forbid(k, "not used by double_slit");
            break;
        case MaskKind::single_slit:
            r.require("object.slit_width");
            o.slit_width = r.positive("object.slit_width");
            o.center = r.number("object.center").value_or(0.0);
            for (const char* k : {"object.separation", "object.file", "object.feature_scale"})
                r.forbid(k, "not used by single_slit");
            break;
        case MaskKind::sampled:
            r.require("object.file");
            o.file = r.text("object.file");
            o.feature_scale = r.positive("object.feature_scale");
            for (const char* k : {"object.slit_width", "object.separation", "object.center"})
                r.forbid(k, "not used by sampled masks");
            break;
    }
    return o;
}

GridsConfig read_grids(Reader& r) {
    GridsConfig g;
    auto count = [&](const std::string& path, int fallback, int minimum) {
        const auto v = r.integer<int>(path);
        if (v && *v < minimum) r.fail(path, "must be >= " + std::to_string(minimum));
        return v.value_or(fallback);
    };
    g.n_a = count("grids.n_a", 64, 2);
    g.n_b = count("grids.n_b", 64, 2);
    g.span_a = r.positive("grids.span_a");
    g.span_b = r.positive("grids.span_b");
    if (r.has("grids.n_source")) g.n_source = count("grids.n_source", 0, 16);
    g.source_span = r.positive("grids.source_span");
    if (r.has("grids.n_source") != r.has("grids.source_span"))
        r.fail("grids.n_source", "give both grids.n_source and grids.source_span, or neither");
    return g;
}

RunConfig read_run(Reader& r) {
    RunConfig run;
    r.require("run.mode");
    run.mode = r.choice<RunMode>("run.mode", {{"analytic", RunMode::analytic},
                                              {"montecarlo", RunMode::montecarlo},
                                              {"geometric", RunMode::geometric},
                                              {"refocus", RunMode::refocus},
                                              {"budget", RunMode::budget}})
                   .value_or(RunMode::analytic);
    run.seed = r.integer<std::uint64_t>("run.seed").value_or(0);
    if (const auto n = r.integer<int>("run.n_realizations")) {
        if (*n < 2) r.fail("run.n_realizations", "must be >= 2");
        run.n_realizations = *n;
    }
    if (const auto b = r.integer<int>("run.batches")) {
        if (*b < 2) r.fail("run.batches", "must be >= 2");
        run.batches = *b;
    }
    if (run.batches > run.n_realizations) r.fail("run.batches", "cannot exceed run.n_realizations");
    if (const auto out = r.text("run.output")) run.output = *out;
    run.gamma_file = r.text("run.gamma_file");
    if (run.gamma_file && run.mode != RunMode::refocus) r.fail("run.gamma_file", "only used in refocus mode");
    return run;
}

BudgetConfig read_budget(Reader& r) {
    BudgetConfig b;
    r.require("budget.n_tot");
    r.require("budget.delta");
    if (const auto n = r.integer<int>("budget.n_tot")) {
        if (*n < 2) r.fail("budget.n_tot", "must be >= 2");
        b.n_tot = *n;
    }
    b.delta = r.positive("budget.delta").value_or(0);
    return b;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::analytic: return "analytic";
        case RunMode::montecarlo: return "montecarlo";
        case RunMode::geometric: return "geometric";
        case RunMode::refocus: return "refocus";
        case RunMode::budget: return "budget";
    }
    return "?";
}

ExperimentConfig parse_config(std::string_view text, const std::string& base_dir) {
    Reader r(tokenize(text));
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.run = read_run(r);
    const bool physical = c.run.mode != RunMode::budget;
    if (physical || r.has_section("geometry")) c.geometry = read_geometry(r);
    if (physical || r.has_section("source")) c.source = read_source(r);
    if (physical || r.has_section("object")) c.object = read_object(r);
    c.grids = read_grids(r);
    if (!physical || r.has_section("budget")) c.budget = read_budget(r);
    r.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.geometry == b.geometry && a.source == b.source && a.object == b.object && a.grids == b.grids &&
           a.run == b.run && a.budget == b.budget;
}

std::string serialize(const ExperimentConfig& c) {
    std::ostringstream os;
    auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    auto quoted = [](const std::string& s) { return '"' + s + '"'; };

    os << "[run]\n";
    kv("mode", std::string(to_string(c.run.mode)));
    kv("seed", std::to_string(c.run.seed));
    kv("n_realizations", std::to_string(c.run.n_realizations));
    kv("batches", std::to_string(c.run.batches));
    kv("output", quoted(c.run.output));
    if (c.run.gamma_file) kv("gamma_file", quoted(*c.run.gamma_file));

    if (c.geometry) {
        const auto& g = *c.geometry;
        os << "\n[geometry]\n";
        kv("z_a", fmt(g.z_a));
        kv("z_b", fmt(g.z_b));
        kv("S_o", fmt(g.source_to_lens));
        if (g.focal_length) kv("F", fmt(*g.focal_length));
        if (g.lens_to_sensor) kv("S_i", fmt(*g.lens_to_sensor));
        kv("lambda0", fmt(g.lambda0));
    }
    if (c.source) {
        const auto& s = *c.source;
        os << "\n[source]\n";
        kv("kind", s.kind == SourceKind::gaussian ? "gaussian" : "tophat");
        if (s.sigma) kv("sigma", fmt(*s.sigma));
        if (s.width) kv("width", fmt(*s.width));
    }
    if (c.object) {
        const auto& o = *c.object;
        os << "\n[object]\n";
        switch (o.kind) {
            case MaskKind::double_slit:
                kv("kind", "double_slit");
                kv("slit_width", fmt(*o.slit_width));
                kv("separation", fmt(*o.separation));
                break;
            case MaskKind::single_slit:
                kv("kind", "single_slit");
                kv("slit_width", fmt(*o.slit_width));
                kv("center", fmt(o.center));
                break;
            case MaskKind::sampled:
                kv("kind", "sampled");
                kv("file", quoted(*o.file));
                if (o.feature_scale) kv("feature_scale", fmt(*o.feature_scale));
                break;
        }
    }
    os << "\n[grids]\n";
    kv("n_a", std::to_string(c.grids.n_a));
    kv("n_b", std::to_string(c.grids.n_b));
    if (c.grids.span_a) kv("span_a", fmt(*c.grids.span_a));
    if (c.grids.span_b) kv("span_b", fmt(*c.grids.span_b));
    if (c.grids.n_source) kv("n_source", std::to_string(*c.grids.n_source));
    if (c.grids.source_span) kv("source_span", fmt(*c.grids.source_span));
    if (c.budget) {
        os << "\n[budget]\n";
        kv("n_tot", std::to_string(c.budget->n_tot));
        kv("delta", fmt(c.budget->delta));
    }
    return os.str();
}

SetupGeometry build_geometry(const ExperimentConfig& c) {
    if (!c.geometry) throw ValidationError("geometry: required");
    const auto& g = *c.geometry;
    const LensInput lens = g.focal_length ? LensInput{FocalLength{*g.focal_length}}
                                          : LensInput{ImageDistance{*g.lens_to_sensor}};
    return make_geometry(g.z_a, g.z_b, g.source_to_lens, lens, g.lambda0);
}

SourceProfile build_source(const ExperimentConfig& c) {
    if (!c.source) throw ValidationError("source: required");
    return c.source->kind == SourceKind::gaussian ? SourceProfile::gaussian(*c.source->sigma)
                                                  : SourceProfile::tophat(*c.source->width);
}

namespace {

// rho_o,re,im rows on a uniform grid; '#' comments and one optional header row.
ObjectMask read_sampled_mask(const std::string& path, std::optional<double> feature_scale) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read object file '" + path + "'");
    std::vector<double> rho;
    std::vector<Complex> values;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<double> cols;
        std::size_t pos = 0;
        bool numeric = true;
        while (pos <= t.size()) {
            const auto comma = t.find(',', pos);
            const auto field = trim(t.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
            double v = 0;
            const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || end != field.data() + field.size()) numeric = false;
            cols.push_back(v);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (!numeric) {
            if (rho.empty()) continue;  // header
            throw ParseError(number, "object file '" + path + "': non-numeric row");
        }
        if (cols.size() < 2 || cols.size() > 3)
            throw ParseError(number, "object file '" + path + "': expected rho_o,re[,im]");
        rho.push_back(cols[0]);
        values.emplace_back(cols[1], cols.size() == 3 ? cols[2] : 0.0);
    }
    if (rho.size() < 2) throw ValidationError("object.file: needs at least two samples");
    const double step = (rho.back() - rho.front()) / double(rho.size() - 1);
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (std::abs(rho[i] - (rho.front() + double(i) * step)) > 1e-6 * step)
            throw ValidationError("object.file: samples must be uniformly spaced and increasing");
    return ObjectMask::sampled(rho.front(), step, values, feature_scale);
}

}  // namespace

ObjectMask build_mask(const ExperimentConfig& c) {
    if (!c.object) throw ValidationError("object: required");
    const auto& o = *c.object;
    switch (o.kind) {
        case MaskKind::double_slit: return ObjectMask::double_slit(*o.separation, *o.slit_width);
        case MaskKind::single_slit: return ObjectMask::single_slit(*o.slit_width, o.center);
        case MaskKind::sampled: {
            std::filesystem::path p(*o.file);
            if (p.is_relative() && !c.base_dir.empty()) p = std::filesystem::path(c.base_dir) / p;
            return read_sampled_mask(p.string(), o.feature_scale);
        }
    }
    throw ValidationError("object.kind: unsupported");
}

Axis build_axis_a(const ExperimentConfig& c) {
    const double span = c.grids.span_a ? *c.grids.span_a : 2.0 * build_mask(c).support_half_width();
    return Axis::symmetric(c.grids.n_a, span);
}

Axis build_axis_b(const ExperimentConfig& c) {
    double span = 0;
    if (c.grids.span_b) {
        span = *c.grids.span_b;
    } else {
        const auto s = build_source(c);
        const double radius = s.kind() == SourceKind::gaussian ? 3.0 * s.sigma() : s.support_half_width();
        span = build_geometry(c).magnification() * radius;
    }
    return Axis::symmetric(c.grids.n_b, span);
}

SensorBudget build_budget(const ExperimentConfig& c, Scheme scheme) {
    if (!c.budget) throw ValidationError("budget: required");
    return {c.budget->n_tot, c.budget->delta, scheme};
}

}  // namespace cpi
