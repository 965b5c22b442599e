// SPDX-License-Identifier: Apache-2.0
#include "fadechan/cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

#include "fadechan/error.hpp"

namespace fadechan {
namespace {

constexpr double kModelSwitchLength = 2000.0;  // m

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Typed access to one JSON object with unknown-key rejection.
class Section {
public:
    Section(const Json* obj, std::string path, std::initializer_list<std::string_view> allowed)
        : obj_(obj), path_(std::move(path)) {
        if (!obj_) return;
        if (!obj_->is_object()) throw InputError(path_, "expected an object");
        for (auto it = obj_->begin(); it != obj_->end(); ++it) {
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                throw InputError(join(path_, it.key()), "unknown key");
        }
    }

    const Json* get(std::string_view key) const {
        if (!obj_) return nullptr;
        const auto it = obj_->find(std::string(key));
        return it == obj_->end() || it->is_null() ? nullptr : &*it;
    }

    double number(std::string_view key, double fallback) const {
        const Json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number()) throw InputError(join(path_, key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) throw InputError(join(path_, key), "must be finite");
        return x;
    }

    std::uint64_t count(std::string_view key, std::uint64_t fallback) const {
        const Json* v = get(key);
        if (!v) return fallback;
        if (v->is_number_unsigned()) return v->get<std::uint64_t>();
        if (v->is_number_float()) {
            const double x = v->get<double>();
            if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
        }
        throw InputError(join(path_, key), "expected a non-negative integer");
    }

    std::string text(std::string_view key, const std::string& fallback) const {
        const Json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) throw InputError(join(path_, key), "expected a string");
        return v->get<std::string>();
    }

    std::string field(std::string_view key) const { return join(path_, key); }

private:
    const Json* obj_;
    std::string path_;
};

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw InputError(field, what);
}

std::vector<double> read_grid(const Json& g, const std::string& path) {
    std::vector<double> grid;
    if (g.is_array()) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number()) throw InputError(path + "[" + std::to_string(i) + "]", "expected a number");
            grid.push_back(g[i].get<double>());
        }
    } else {
        const Section s(&g, path, {"start", "stop", "points"});
        const double start = s.number("start", std::numeric_limits<double>::quiet_NaN());
        const double stop = s.number("stop", std::numeric_limits<double>::quiet_NaN());
        const auto points = s.count("points", 0);
        require(std::isfinite(start), s.field("start"), "required");
        require(std::isfinite(stop), s.field("stop"), "required");
        require(points >= 1, s.field("points"), "must be at least 1");
        for (std::uint64_t i = 0; i < points; ++i)
            grid.push_back(points == 1 ? start : start + (stop - start) * static_cast<double>(i) / (points - 1));
    }
    require(!grid.empty(), path, "grid is empty");
    return grid;
}

}  // namespace

std::string_view sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::d0: return "d0";
        case SweepVariable::tracking_ratio: return "tracking_ratio";
        case SweepVariable::L: return "L";
    }
    return "unknown";
}

SamplingPlan Scenario::pdt_plan() const {
    SamplingPlan p;
    p.n_samples = sampling.n_samples;
    p.bins = sampling.bins;
    p.seed = sampling.seed;
    p.shard_size = sampling.shard_size;
    return p;
}

StatisticsPlan Scenario::statistics_plan() const {
    StatisticsPlan p;
    p.realizations = sampling.realizations;
    p.seed = sampling.seed;
    p.quad_tol = sampling.quad_tol;
    return p;
}

std::string Scenario::hash() const {
    Json copy = resolved;
    copy["sampling"].erase("seed");
    return fnv1a_hex(canonical_json(copy));
}

void apply_override(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--set", "expected key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    Json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw InputError(path, "empty path component");
        if (!node->is_object()) throw InputError(path, "cannot descend into a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = Json::object();
        start = dot + 1;
    }
}

Scenario scenario_from_json(const Json& doc) {
    Scenario sc;
    const Section top(&doc, "",
                      {"model", "channel", "aperture", "corrections", "sampling", "sweep", "orientation", "tolerances"});
    sc.model = parse_model(top.text("model", "weak_bw"));

    const Section ch(top.get("channel"), "channel", {"wavelength", "W0", "Cn2", "L", "beam"});
    sc.channel.wavelength = ch.number("wavelength", sc.channel.wavelength);
    sc.channel.W0 = ch.number("W0", sc.channel.W0);
    sc.channel.Cn2 = ch.number("Cn2", sc.channel.Cn2);
    sc.channel.L = ch.number("L", sc.channel.L);
    const std::string beam = ch.text("beam", "collimated");
    require(beam == "collimated" || beam == "focused", ch.field("beam"), "must be 'collimated' or 'focused'");
    sc.channel.focus = beam == "focused" ? BeamFocus::focused : BeamFocus::collimated;
    require(sc.channel.wavelength > 0.0, ch.field("wavelength"), "must be positive");
    require(sc.channel.W0 > 0.0, ch.field("W0"), "must be positive");
    require(sc.channel.Cn2 >= 0.0, ch.field("Cn2"), "must be non-negative");
    require(sc.channel.L > 0.0, ch.field("L"), "must be positive");

    const Section ap(top.get("aperture"), "aperture", {"a1", "a2", "d0"});
    sc.aperture.a1 = ap.number("a1", sc.aperture.a1);
    sc.aperture.a2 = ap.number("a2", sc.aperture.a2);
    sc.aperture.d0 = ap.number("d0", sc.aperture.d0);
    require(sc.aperture.a1 > 0.0, ap.field("a1"), "must be positive");
    require(sc.aperture.a2 >= 0.0, ap.field("a2"), "must be non-negative");
    require(sc.aperture.a2 < sc.aperture.a1, "aperture.a1, aperture.a2", "a2 must be smaller than a1");
    require(sc.aperture.d0 >= 0.0, ap.field("d0"), "must be non-negative");
    require(sc.aperture.d0 <= 2.0 * sc.aperture.a1, ap.field("d0"), "must not exceed 2 a1");

    const Section co(top.get("corrections"), "corrections", {"tracking_ratio", "loss_db"});
    sc.tracking_ratio = co.number("tracking_ratio", 1.0);
    sc.loss_db = co.number("loss_db", 0.0);
    require(sc.tracking_ratio > 0.0 && sc.tracking_ratio <= 1.0, co.field("tracking_ratio"), "must lie in (0, 1]");
    require(sc.loss_db >= 0.0, co.field("loss_db"), "must be non-negative");
    sc.eta_det = db_to_factor(sc.loss_db);

    const Section sa(top.get("sampling"), "sampling",
                     {"n_samples", "bins", "seed", "shard_size", "realizations", "quad_tol"});
    sc.sampling.n_samples = sa.count("n_samples", sc.sampling.n_samples);
    sc.sampling.bins = sa.count("bins", sc.sampling.bins);
    sc.sampling.seed = sa.count("seed", sc.sampling.seed);
    sc.sampling.shard_size = sa.count("shard_size", sc.sampling.shard_size);
    sc.sampling.realizations = sa.count("realizations", sc.sampling.realizations);
    sc.sampling.quad_tol = sa.number("quad_tol", sc.sampling.quad_tol);
    require(sc.sampling.n_samples >= 1, sa.field("n_samples"), "must be positive");
    require(sc.sampling.bins >= 1, sa.field("bins"), "must be positive");
    require(sc.sampling.shard_size >= 1, sa.field("shard_size"), "must be positive");
    require(sc.sampling.realizations >= 2, sa.field("realizations"), "must be at least 2");
    require(sc.sampling.quad_tol > 0.0 && sc.sampling.quad_tol < 1e-3, sa.field("quad_tol"), "must lie in (0, 1e-3)");

    const Section ori(top.get("orientation"), "orientation", {"center", "sigma"});
    if (top.get("orientation") && ori.get("sigma")) {
        const double sigma = ori.number("sigma", 0.0);
        require(sigma >= 0.0, ori.field("sigma"), "must be non-negative");
        sc.orientation = AngleMode::wrapped_gaussian(ori.number("center", 0.0), sigma);
    }

    if (const Json* sw = top.get("sweep")) {
        const Section s(sw, "sweep", {"variable", "grid"});
        SweepSettings settings;
        const std::string var = s.text("variable", "");
        if (var == "d0") settings.variable = SweepVariable::d0;
        else if (var == "tracking_ratio") settings.variable = SweepVariable::tracking_ratio;
        else if (var == "L") settings.variable = SweepVariable::L;
        else throw InputError(s.field("variable"), "must be one of d0, tracking_ratio, L");
        const Json* g = s.get("grid");
        require(g != nullptr, s.field("grid"), "required");
        settings.grid = read_grid(*g, s.field("grid"));
        for (std::size_t i = 0; i < settings.grid.size(); ++i) {
            const double v = settings.grid[i];
            const std::string f = s.field("grid") + "[" + std::to_string(i) + "]";
            switch (settings.variable) {
                case SweepVariable::d0: require(v >= 0.0 && v <= 2.0 * sc.aperture.a1, f, "must lie in [0, 2 a1]"); break;
                case SweepVariable::tracking_ratio: require(v > 0.0 && v <= 1.0, f, "must lie in (0, 1]"); break;
                case SweepVariable::L: require(v > 0.0, f, "must be positive"); break;
            }
        }
        sc.sweep = settings;
    }

    if (const Json* tol = top.get("tolerances")) {
        require(tol->is_object(), "tolerances", "expected an object");
        for (auto it = tol->begin(); it != tol->end(); ++it) {
            require(it->is_number() && it->get<double>() >= 0.0, join("tolerances", it.key()),
                    "expected a non-negative number");
            sc.tolerances[it.key()] = it->get<double>();
        }
    }

    const double L = sc.channel.L;
    if (sc.model == PdtModel::elliptic && L > kModelSwitchLength)
        sc.warnings.push_back("elliptic model outside its applicability range (L > 2000 m)");
    if (sc.model == PdtModel::weak_bw && L < kModelSwitchLength)
        sc.warnings.push_back("weak_bw model outside its applicability range (L < 2000 m)");

    Json& r = sc.resolved;
    r["model"] = std::string(model_name(sc.model));
    r["channel"] = {{"wavelength", sc.channel.wavelength}, {"W0", sc.channel.W0}, {"Cn2", sc.channel.Cn2},
                    {"L", sc.channel.L}, {"beam", beam}};
    r["aperture"] = {{"a1", sc.aperture.a1}, {"a2", sc.aperture.a2}, {"d0", sc.aperture.d0}};
    r["corrections"] = {{"tracking_ratio", sc.tracking_ratio}, {"loss_db", sc.loss_db}, {"eta_det", sc.eta_det}};
    r["sampling"] = {{"n_samples", sc.sampling.n_samples}, {"bins", sc.sampling.bins}, {"seed", sc.sampling.seed},
                     {"shard_size", sc.sampling.shard_size}, {"realizations", sc.sampling.realizations},
                     {"quad_tol", sc.sampling.quad_tol}};
    if (sc.orientation.kind == AngleMode::Kind::wrapped_gaussian)
        r["orientation"] = {{"center", sc.orientation.center}, {"sigma", sc.orientation.sigma}};
    else
        r["orientation"] = "uniform";
    if (sc.sweep) r["sweep"] = {{"variable", std::string(sweep_variable_name(sc.sweep->variable))}, {"grid", sc.sweep->grid}};
    if (!sc.tolerances.empty()) r["tolerances"] = sc.tolerances;
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("scenario", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json doc = Json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) throw InputError("scenario", "invalid JSON in " + path.string());
    if (!doc.is_object()) throw InputError("scenario", "top level must be an object");
    for (const auto& o : overrides) apply_override(doc, o);
    return scenario_from_json(doc);
}

}  // namespace fadechan
