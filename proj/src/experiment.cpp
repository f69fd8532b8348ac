#include "cpi/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "cpi/analysis.hpp"
#include "cpi/budget.hpp"
#include "cpi/correlator.hpp"
#include "cpi/refocus.hpp"
#include "cpi/speckle.hpp"

namespace cpi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string describe(const Axis& a) {
    return "n=" + std::to_string(a.size()) + " center=" + fmt(a.center()) + " step=" + fmt(a.step());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
}

// "key=value key=value" after the "# name:" prefix.
std::map<std::string, std::string> parse_fields(const std::string& s) {
    std::map<std::string, std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

double to_double(const std::string& s, const std::string& path) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError(path + ": bad number '" + s + "'");
    return v;
}

Axis read_axis(const std::map<std::string, std::string>& f, const std::string& path) {
    for (const char* k : {"n", "center", "step"})
        if (!f.count(k)) throw ValidationError(path + ": axis metadata lacks '" + std::string(k) + "'");
    return Axis(static_cast<int>(to_double(f.at("n"), path)), to_double(f.at("center"), path), to_double(f.at("step"), path));
}

}  // namespace

void write_grid_csv(const std::string& path, const CorrelationGrid& grid, const std::string& quantity) {
    auto out = open_out(path);
    out << "# quantity: " << quantity << '\n';
    out << "# axis_a: " << describe(grid.axis_a) << '\n';
    out << "# axis_b: " << describe(grid.axis_b) << '\n';
    out << "# snapshot: z_a=" << fmt(grid.snapshot.z_a) << " z_b=" << fmt(grid.snapshot.z_b)
        << " M=" << fmt(grid.snapshot.magnification) << '\n';
    out << "rho_a,rho_b,value,valid\n";
    for (int i = 0; i < grid.axis_a.size(); ++i)
        for (int j = 0; j < grid.axis_b.size(); ++j)
            out << fmt(grid.axis_a.coordinate(i)) << ',' << fmt(grid.axis_b.coordinate(j)) << ','
                << fmt(grid.values(i, j)) << ',' << (grid.is_valid(i, j) ? 1 : 0) << '\n';
    close_out(out, path);
}

CorrelationGrid read_grid_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read grid '" + path + "'");
    std::optional<Axis> a, b;
    std::optional<GridSnapshot> snap;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.rfind("# ", 0) != 0) break;
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string name = line.substr(2, colon - 2);
        const auto f = parse_fields(line.substr(colon + 1));
        if (name == "axis_a") a = read_axis(f, path);
        if (name == "axis_b") b = read_axis(f, path);
        if (name == "snapshot") {
            if (!f.count("z_a") || !f.count("z_b") || !f.count("M"))
                throw ValidationError(path + ": snapshot needs z_a, z_b and M");
            snap = GridSnapshot{to_double(f.at("z_a"), path), to_double(f.at("z_b"), path), to_double(f.at("M"), path)};
        }
    }
    if (!a || !b || !snap) throw ValidationError(path + ": missing axis_a, axis_b or snapshot metadata");
    if (line != "rho_a,rho_b,value,valid") throw ParseError(number, path + ": expected header rho_a,rho_b,value,valid");

    CorrelationGrid grid{*a, *b, ArrayXXd::Zero(a->size(), b->size()), *snap,
                         MaskXX::Constant(a->size(), b->size(), true)};
    for (int i = 0; i < a->size(); ++i)
        for (int j = 0; j < b->size(); ++j) {
            ++number;
            if (!std::getline(in, line)) throw ParseError(number, path + ": grid truncated");
            std::istringstream row(line);
            std::string ra, rb, v, ok;
            if (!std::getline(row, ra, ',') || !std::getline(row, rb, ',') || !std::getline(row, v, ',') ||
                !std::getline(row, ok))
                throw ParseError(number, path + ": expected 4 fields");
            const double tol = 1e-9 * std::max(a->step(), b->step());
            if (std::abs(to_double(ra, path) - a->coordinate(i)) > tol ||
                std::abs(to_double(rb, path) - b->coordinate(j)) > tol)
                throw ParseError(number, path + ": coordinates do not match the axis metadata");
            grid.values(i, j) = to_double(v, path);
            if (ok != "0" && ok != "1") throw ParseError(number, path + ": valid must be 0 or 1");
            grid.valid(i, j) = ok == "1";
        }
    if (grid.all_valid()) grid.valid.resize(0, 0);
    check_grid(grid);
    return grid;
}

void write_image_csv(const std::string& path, const SampledImage& image) {
    auto out = open_out(path);
    out << "# quantity: " << to_string(image.label) << '\n';
    out << "# axis: " << describe(image.axis) << '\n';
    out << "rho,value\n";
    for (int i = 0; i < image.axis.size(); ++i) out << fmt(image.axis.coordinate(i)) << ',' << fmt(image.values(i)) << '\n';
    close_out(out, path);
}

std::pair<double, double> write_grid_pgm(const std::string& path, const CorrelationGrid& grid) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < grid.values.rows(); ++i)
        for (int j = 0; j < grid.values.cols(); ++j)
            if (grid.is_valid(i, j)) {
                lo = std::min(lo, grid.values(i, j));
                hi = std::max(hi, grid.values(i, j));
            }
    if (!(lo <= hi)) lo = hi = 0.0;
    const int rows = static_cast<int>(grid.values.rows()), cols = static_cast<int>(grid.values.cols());
    auto out = open_out(path);
    out << "P5\n" << cols << ' ' << rows << "\n65535\n";
    std::string buf;
    buf.reserve(std::size_t(rows) * cols * 2);
    for (int r = rows - 1; r >= 0; --r)
        for (int j = 0; j < cols; ++j) {
            unsigned v = 0;
            if (grid.is_valid(r, j) && hi > lo) v = static_cast<unsigned>(std::lround((grid.values(r, j) - lo) / (hi - lo) * 65535.0));
            buf.push_back(static_cast<char>(v >> 8));
            buf.push_back(static_cast<char>(v & 0xff));
        }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    close_out(out, path);
    return {lo, hi};
}

void write_json(const std::string& path, const json& value) {
    auto out = open_out(path);
    out << value.dump(2) << '\n';
    close_out(out, path);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 unavailable");
    char chunk[1 << 16];
    while (in.read(chunk, sizeof chunk) || in.gcount() > 0) EVP_DigestUpdate(ctx.get(), chunk, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s.push_back(hex[digest[i] >> 4]);
        s.push_back(hex[digest[i] & 0xf]);
    }
    return s;
}

namespace {

class Run {
public:
    Run(const ExperimentConfig& c, int threads) : config_(c), threads_(threads), dir_(c.run.output) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
    }

    template <typename F>
    auto stage(const std::string& name, F&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            timings_[name] = seconds_since(t0);
        } else {
            auto r = body();
            timings_[name] = seconds_since(t0);
            return r;
        }
    }

    void grid(const std::string& stem, const CorrelationGrid& g, const std::string& quantity) {
        write_grid_csv(path(stem + ".csv"), g, quantity);
        add(stem + ".csv", "csv");
        const auto [lo, hi] = write_grid_pgm(path(stem + ".pgm"), g);
        add(stem + ".pgm", "pgm");
        pgm_[stem + ".pgm"] = {{"min", lo}, {"max", hi}};
    }
    void image(const std::string& stem, const SampledImage& img) {
        write_image_csv(path(stem + ".csv"), img);
        add(stem + ".csv", "csv");
    }
    void json_file(const std::string& name, const json& value) {
        write_json(path(name), value);
        add(name, "json");
    }
    void csv_text(const std::string& name, const std::string& text) {
        auto out = open_out(path(name));
        out << text;
        close_out(out, path(name));
        add(name, "csv");
    }

    json& results() { return results_; }

    RunManifest finish() {
        json files = json::array();
        for (const auto& [name, format] : files_)
            files.push_back({{"path", name}, {"format", format}, {"sha256", sha256_file(path(name))},
                             {"bytes", fs::file_size(path(name))}});
        json m = {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                  {"config", serialize(config_)},
                  {"mode", std::string(to_string(config_.run.mode))},
                  {"threads", threads_},
                  {"files", files},
                  {"results", results_},
                  {"pgm_scaling", pgm_},
                  {"timings", timings_}};
        write_json(path("manifest.json"), m);
        return {dir_.string(), m};
    }

private:
    static double seconds_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void add(const std::string& name, const char* format) { files_.emplace_back(name, format); }

    const ExperimentConfig& config_;
    int threads_;
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
    json results_ = json::object();
    json pgm_ = json::object();
    json timings_ = json::object();
};

// Peak positions, and slit contrast when the mask is a double slit.
json image_stats(const SampledImage& img, const ExperimentConfig& c) {
    json j;
    j["peak"] = img.values.maxCoeff();
    if (img.values.maxCoeff() <= 0.0) return j;
    const auto [ml, mr] = lobe_maxima(img);
    j["lobe_maxima"] = {ml, mr};
    try {
        const auto [cl, cr] = lobe_centroids(img);
        j["lobe_centroids"] = {cl, cr};
    } catch (const Error&) {
    }
    if (c.object && c.object->kind == MaskKind::double_slit) j["slit_contrast"] = slit_contrast(img, 0.5 * *c.object->separation);
    if (c.object && c.object->kind == MaskKind::single_slit) {
        const auto fit = fit_gaussian(img);
        j["gaussian_fit"] = {{"center", fit.center}, {"width", fit.width}, {"spot_diameter", spot_diameter(fit.width)}};
    }
    return j;
}

json setup_stats(const SetupGeometry& g, const SourceProfile& s, const ObjectMask& m) {
    json j = {{"alpha", g.alpha()}, {"magnification", g.magnification()}, {"S_i", g.lens_to_sensor()},
              {"F", g.focal_length()}, {"omega0_over_c", g.wavenumber()}};
    if (s.kind() == SourceKind::gaussian) {
        const auto p = psf_eval(g, s.sigma());
        j["psf"] = {{"width_coherent", p.width_coherent}, {"width_incoherent", p.width_incoherent}};
    }
    if (m.feature_scale()) {
        const auto r = resolution_limits(g, s, m);
        j["resolution_limits"] = {{"delta_rho_a", r.delta_rho_a}, {"delta_rho_b", r.delta_rho_b}};
    }
    return j;
}

QuadratureSpec quadrature_for(const ExperimentConfig& c, const SetupGeometry& g, const SourceProfile& s,
                              const ObjectMask& m, const Axis& axis_a) {
    if (c.grids.n_source) return {*c.grids.n_source, *c.grids.source_span};
    return auto_quadrature(g, s, m, axis_a);
}

void run_analytic(Run& run, const ExperimentConfig& c, int threads) {
    const auto g = build_geometry(c);
    const auto s = build_source(c);
    const auto m = build_mask(c);
    const Axis a = build_axis_a(c), b = build_axis_b(c);
    const auto quad = quadrature_for(c, g, s, m, a);
    run.results()["setup"] = setup_stats(g, s, m);
    run.results()["quadrature"] = {{"n_source", quad.n_source}, {"source_span", quad.source_span},
                                   {"max_phase_step", max_phase_step(g, s, m, a, quad)}};
    const auto gamma = run.stage("gamma_quadrature", [&] { return gamma_quadrature(g, s, m, a, b, quad, threads); });
    const auto ghost = ghost_image(gamma);
    run.stage("write", [&] {
        run.grid("gamma", gamma, "gamma");
        run.image("ghost", ghost);
    });
    run.results()["ghost"] = image_stats(ghost, c);
    if (g.alpha() != 1.0) {
        const auto refocused = run.stage("refocus", [&] { return refocus_grid(gamma, RefocusSpec::from(gamma), threads); });
        auto img = ghost_image(refocused);
        img.label = ImageLabel::refocused;
        run.stage("write_refocused", [&] {
            run.grid("refocused_gamma", refocused, "refocused_gamma");
            run.image("refocused", img);
        });
        run.results()["refocused"] = image_stats(img, c);
        run.results()["refocused"]["valid_fraction"] = double(refocused.valid_count()) / double(refocused.values.size());
    }
}

void run_montecarlo(Run& run, const ExperimentConfig& c, int threads) {
    const auto g = build_geometry(c);
    const auto s = build_source(c);
    const auto m = build_mask(c);
    const Axis a = build_axis_a(c), b = build_axis_b(c);
    const SpeckleRun spec{c.run.seed, c.run.n_realizations, c.run.batches, auto_source_axis(g, s, m, a, b), a, b};
    std::optional<QuadratureSpec> quad;
    if (c.grids.n_source) quad = QuadratureSpec{*c.grids.n_source, *c.grids.source_span};
    run.results()["setup"] = setup_stats(g, s, m);
    const auto est = run.stage("estimate_gamma", [&] { return estimate_gamma(spec, g, s, m, threads, quad); });
    const auto ghost = ghost_image(est.gamma);
    const auto& r = est.report;
    const json report = {{"n", r.n},
                         {"seed", c.run.seed},
                         {"batches", c.run.batches},
                         {"source_cells", spec.source_axis.size()},
                         {"source_cell", spec.source_axis.step()},
                         {"l1", r.l1},
                         {"linf", r.linf},
                         {"mean_standard_error", r.mean_standard_error},
                         {"l1_over_standard_error", r.l1 / r.mean_standard_error},
                         {"reference_peak", r.reference_peak},
                         {"clamped", r.clamped}};
    run.stage("write", [&] {
        run.grid("gamma_mc", est.gamma, "gamma_montecarlo");
        run.image("ghost", ghost);
        run.json_file("convergence.json", report);
    });
    run.results()["convergence"] = report;
    run.results()["ghost"] = image_stats(ghost, c);
}

void run_geometric(Run& run, const ExperimentConfig& c) {
    const auto g = build_geometry(c);
    const auto s = build_source(c);
    const auto m = build_mask(c);
    const Axis a = build_axis_a(c), b = build_axis_b(c);
    run.results()["setup"] = setup_stats(g, s, m);
    const auto gamma = run.stage("gamma_geometric", [&] { return gamma_geometric(g, s, m, a, b); });
    const auto ghost = ghost_image(gamma);
    run.stage("write", [&] {
        run.grid("gamma_geo", gamma, "gamma_geometric");
        run.image("ghost", ghost);
    });
    run.results()["ghost"] = image_stats(ghost, c);
}

void run_refocus(Run& run, const ExperimentConfig& c, int threads) {
    CorrelationGrid gamma = run.stage("load_gamma", [&] {
        if (c.run.gamma_file) {
            fs::path p(*c.run.gamma_file);
            if (p.is_relative() && !c.base_dir.empty()) p = fs::path(c.base_dir) / p;
            return read_grid_csv(p.string());
        }
        const auto g = build_geometry(c);
        const auto s = build_source(c);
        const auto m = build_mask(c);
        const Axis a = build_axis_a(c);
        return gamma_quadrature(g, s, m, a, build_axis_b(c), quadrature_for(c, g, s, m, a), threads);
    });
    // The configured geometry names the acquisition, and must match a loaded grid.
    const auto g = build_geometry(c);
    const auto expected = snapshot_of(g);
    if (std::abs(gamma.snapshot.z_a - expected.z_a) > 1e-12 * expected.z_a ||
        std::abs(gamma.snapshot.z_b - expected.z_b) > 1e-12 * expected.z_b ||
        std::abs(gamma.snapshot.magnification - expected.magnification) > 1e-9 * expected.magnification)
        throw ValidationError("run.gamma_file: grid was acquired with a different geometry");
    run.results()["setup"] = setup_stats(g, build_source(c), build_mask(c));
    const auto spec = RefocusSpec::from(gamma);
    const auto refocused = run.stage("refocus", [&] { return refocus_grid(gamma, spec, threads); });
    auto img = ghost_image(refocused);
    img.label = ImageLabel::refocused;
    const auto before = ghost_image(gamma);
    run.stage("write", [&] {
        run.grid("refocused_gamma", refocused, "refocused_gamma");
        run.image("refocused", img);
        run.image("ghost", before);
    });
    run.results()["ghost"] = image_stats(before, c);
    run.results()["refocused"] = image_stats(img, c);
    run.results()["refocused"]["valid_fraction"] = double(refocused.valid_count()) / double(refocused.values.size());
}

void run_budget(Run& run, const ExperimentConfig& c) {
    const auto p = tradeoff_curve(build_budget(c, Scheme::plenoptic));
    const auto q = tradeoff_curve(build_budget(c, Scheme::cpi));
    std::ostringstream points;
    points << "# quantity: tradeoff\n# n_tot: " << c.budget->n_tot << "\nscheme,n_x,n_u\n";
    for (const auto& pt : p.points) points << "plenoptic," << pt.n_x << ',' << pt.n_u << '\n';
    for (const auto& pt : q.points) points << "cpi," << pt.n_x << ',' << pt.n_u << '\n';
    std::ostringstream curve;
    curve << "# quantity: plenoptic_hyperbola\n# n_tot: " << c.budget->n_tot << "\nn_x,n_u\n";
    for (const auto& [x, u] : plenoptic_hyperbola(c.budget->n_tot, 200)) curve << fmt(x) << ',' << fmt(u) << '\n';
    run.stage("write", [&] {
        run.csv_text("tradeoff.csv", points.str());
        run.csv_text("plenoptic_hyperbola.csv", curve.str());
    });
    json shared = json::array();
    for (const auto& pt : p.points)
        if (const int u = q.angular_at(pt.n_x); u > 0) shared.push_back({{"n_x", pt.n_x}, {"plenoptic", pt.n_u}, {"cpi", u}});
    run.results()["budget"] = {{"n_tot", c.budget->n_tot},
                               {"delta", c.budget->delta},
                               {"width", c.budget->n_tot * c.budget->delta},
                               {"plenoptic_points", p.points.size()},
                               {"cpi_points", q.points.size()},
                               {"shared", shared}};
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config, int threads) {
    if (threads < 1) throw ValidationError("threads: must be >= 1");
    Run run(config, threads);
    switch (config.run.mode) {
        case RunMode::analytic: run_analytic(run, config, threads); break;
        case RunMode::montecarlo: run_montecarlo(run, config, threads); break;
        case RunMode::geometric: run_geometric(run, config); break;
        case RunMode::refocus: run_refocus(run, config, threads); break;
        case RunMode::budget: run_budget(run, config); break;
    }
    return run.finish();
}

}  // namespace cpi
