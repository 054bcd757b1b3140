#include "semalloc/app/config.hpp"

#include "semalloc/errors.hpp"
#include "semalloc/perception_io.hpp"

#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <iomanip>
#include <openssl/evp.h>
#include <sstream>

namespace semalloc::app {

using nlohmann::json;
namespace fs = std::filesystem;

OutputFormat parse_format(const std::string& s)
{
    if (s == "csv") {
        return OutputFormat::csv;
    }
    if (s == "csv+svg") {
        return OutputFormat::csv_svg;
    }
    throw ParseError(fmt::format("unknown output format '{}' (expected csv|csv+svg)", s));
}

std::string to_string(OutputFormat f)
{
    return f == OutputFormat::csv ? "csv" : "csv+svg";
}

std::string sha256_bytes(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_bytes(ss.str());
}

namespace {

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(fmt::format("cannot open '{}'", path.string()));
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) {
            throw ParseError(fmt::format("'{}' must be an object", where_));
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }

    double number(const char* key, double fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        if (!at(key).is_number()) {
            throw ParseError(fmt::format("'{}.{}' must be a number", where_, key));
        }
        return at(key).get<double>();
    }

    template <typename Int>
    Int integer(const char* key, Int fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        if (!at(key).is_number_integer()) {
            throw ParseError(fmt::format("'{}.{}' must be an integer", where_, key));
        }
        return at(key).get<Int>();
    }

    std::string string(const char* key, const std::string& fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        if (!at(key).is_string()) {
            throw ParseError(fmt::format("'{}.{}' must be a string", where_, key));
        }
        return at(key).get<std::string>();
    }

    bool boolean(const char* key, bool fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        if (!at(key).is_boolean()) {
            throw ParseError(fmt::format("'{}.{}' must be true or false", where_, key));
        }
        return at(key).get<bool>();
    }

private:
    const json& j_;
    std::string where_;
};

struct Loader {
    fs::path base;
    std::vector<InputDigest>& inputs;

    fs::path resolve(const std::string& p) const
    {
        const fs::path path(p);
        return path.is_absolute() ? path : base / path;
    }

    void record(const fs::path& path) { inputs.push_back({path.string(), sha256_file(path)}); }

    SurfaceParams surface(const json& j)
    {
        if (j.is_object()) {
            return io::surface_from_json(j);
        }
        if (!j.is_string()) {
            throw ParseError("'surface' must be \"default\", a file path or a parameter object");
        }
        const auto s = j.get<std::string>();
        if (s == "default") {
            return perception::default_surface();
        }
        const auto path = resolve(s);
        record(path);
        if (path.extension() == ".csv") {
            const auto samples = io::read_samples(path.string());
            const auto* rows = std::get_if<SampleSet>(&samples);
            if (rows == nullptr) {
                throw ParseError(fmt::format("{}: surface samples need header psi1,psi2,P", path.string()));
            }
            return fit_surface_auto(*rows).params;
        }
        return io::surface_from_json(read_json(path));
    }

    StreamCurve curve(const json& j, std::size_t index)
    {
        if (j.is_object()) {
            return io::curve_from_json(j);
        }
        if (!j.is_string()) {
            throw ParseError("stream 'curve' must be a default name, a file path or a parameter object");
        }
        const auto s = j.get<std::string>();
        if (s == "default") {
            return index == 0 ? perception::default_prompt_curve() : perception::default_edge_curve();
        }
        if (s == "default:prompt") {
            return perception::default_prompt_curve();
        }
        if (s == "default:edge") {
            return perception::default_edge_curve();
        }
        const auto path = resolve(s);
        record(path);
        if (path.extension() == ".csv") {
            const auto samples = io::read_samples(path.string());
            const auto* rows = std::get_if<CurveSampleSet>(&samples);
            if (rows == nullptr) {
                throw ParseError(fmt::format("{}: curve samples need header psi,P", path.string()));
            }
            return fit_curve_auto(*rows).params;
        }
        return io::curve_from_json(read_json(path));
    }
};

ModulationScheme read_modulation(const Reader& r, const std::string& where)
{
    const auto name = r.string("modulation", "bpsk");
    ModulationScheme m;
    if (name == "custom") {
        if (!r.has("M") || !r.has("a") || !r.has("b")) {
            throw ParseError(fmt::format("'{}': custom modulation needs M, a and b", where));
        }
        m = ModulationScheme{"custom", r.integer<int>("M", 2), r.number("a", 1.0), r.number("b", 1.0)};
    } else {
        m = modulation::preset(name);
        m.a = r.number("a", m.a);
        m.b = r.number("b", m.b);
        if (r.has("M") && r.integer<int>("M", m.order) != m.order) {
            throw ParseError(fmt::format("'{}': M does not match preset '{}'", where, name));
        }
    }
    m.validate();
    return m;
}

std::vector<double> read_targets(const json& doc)
{
    std::vector<double> targets;
    if (doc.contains("target")) {
        if (!doc.at("target").is_number()) {
            throw ParseError("'target' must be a number");
        }
        targets.push_back(doc.at("target").get<double>());
    }
    if (doc.contains("targets")) {
        const auto& t = doc.at("targets");
        if (t.is_array()) {
            for (const auto& v : t) {
                if (!v.is_number()) {
                    throw ParseError("'targets' entries must be numbers");
                }
                targets.push_back(v.get<double>());
            }
        } else if (t.is_object()) {
            const Reader r(t, "targets");
            const double start = r.number("start", NAN);
            const double stop = r.number("stop", NAN);
            const double step = r.number("step", NAN);
            if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) || stop < start) {
                throw ParseError("'targets' range needs start <= stop and step > 0");
            }
            const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
            for (long i = 0; i < n; ++i) {
                // Snap to 12 decimals so 0.1 steps print as written.
                targets.push_back(std::round((start + step * i) * 1e12) / 1e12);
            }
        } else {
            throw ParseError("'targets' must be a list or a {start, stop, step} range");
        }
    }
    for (double t : targets) {
        if (!(t > 0.0) || !(t < 1.0)) {
            throw DomainError(fmt::format("target {} outside (0, 1)", t));
        }
    }
    return targets;
}

} // namespace

ExperimentConfig parse_config(const json& input, const fs::path& base_dir, const Overrides& overrides)
{
    const json& doc = input.contains("config") && input.contains("tool") ? input.at("config") : input;
    const Reader top(doc, "config");
    ExperimentConfig cfg;
    Loader loader{base_dir, cfg.inputs};

    cfg.seed = top.integer<std::uint64_t>("seed", cfg.seed);
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
    }

    cfg.channel_seed = cfg.seed;
    if (top.has("channel")) {
        const Reader ch(top.at("channel"), "channel");
        cfg.channel.h0_db = ch.number("h0_db", cfg.channel.h0_db);
        cfg.channel.d_m = ch.number("d_m", cfg.channel.d_m);
        cfg.channel.d0_m = ch.number("d0_m", cfg.channel.d0_m);
        cfg.channel.alpha = ch.number("alpha", cfg.channel.alpha);
        cfg.channel.noise_dbm = ch.number("noise_dbm", cfg.channel.noise_dbm);
        cfg.fading = parse_fading_mode(ch.string("fading", "deterministic"));
        cfg.channel_seed = ch.integer<std::uint64_t>("seed", cfg.channel_seed);
        cfg.independent_fading = ch.boolean("independent", false);
    }
    cfg.channel.validate();

    if (!top.has("streams") || !top.at("streams").is_array() || top.at("streams").size() != 2) {
        throw ParseError("'streams' must list exactly two streams");
    }
    for (std::size_t i = 0; i < 2; ++i) {
        const auto where = fmt::format("streams[{}]", i);
        const Reader st(top.at("streams").at(i), where);
        auto& s = cfg.streams[i];
        s.name = st.string("name", i == 0 ? "prompt" : "edge");
        s.bits = st.integer<long>("bits", 0);
        if (s.bits < 1) {
            throw DomainError(fmt::format("'{}.bits' must be >= 1", where));
        }
        s.modulation = read_modulation(st, where);
        s.curve = loader.curve(st.has("curve") ? st.at("curve") : json("default"), i);
    }

    cfg.surface = loader.surface(top.has("surface") ? top.at("surface") : json("default"));
    cfg.targets = read_targets(doc);

    if (top.has("solvers")) {
        if (!top.at("solvers").is_array()) {
            throw ParseError("'solvers' must be a list");
        }
        cfg.solvers.clear();
        for (const auto& s : top.at("solvers")) {
            if (!s.is_string()) {
                throw ParseError("'solvers' entries must be strings");
            }
            cfg.solvers.push_back(parse_solver(s.get<std::string>()));
        }
        if (cfg.solvers.empty()) {
            throw DomainError("at least one solver must be selected");
        }
    }

    cfg.grid_n = top.integer<int>("grid_n", cfg.grid_n);
    if (cfg.grid_n < 64) {
        throw DomainError("'grid_n' must be >= 64");
    }
    cfg.cost_basis = parse_cost_basis(top.string("cost_basis", "bits"));

    if (top.has("tolerance")) {
        const Reader t(top.at("tolerance"), "tolerance");
        cfg.tol.abs_tol = t.number("abs_tol", cfg.tol.abs_tol);
        cfg.tol.rel_tol = t.number("rel_tol", cfg.tol.rel_tol);
        cfg.tol.max_iter = t.integer<int>("max_iter", cfg.tol.max_iter);
    }
    cfg.tol.validate();

    if (top.has("sweep")) {
        const Reader sw(top.at("sweep"), "sweep");
        if (sw.has("modulations")) {
            for (const auto& m : sw.at("modulations")) {
                if (!m.is_string()) {
                    throw ParseError("'sweep.modulations' entries must be strings");
                }
                modulation::preset(m.get<std::string>());
                cfg.sweep_modulations.push_back(m.get<std::string>());
            }
        }
    }

    if (top.has("simulation")) {
        const Reader sim(top.at("simulation"), "simulation");
        cfg.simulation.present = true;
        cfg.simulation.n_bits = sim.integer<std::uint64_t>("n_bits", cfg.simulation.n_bits);
        cfg.simulation.solver = parse_solver(sim.string("solver", "bisection"));
        if (sim.has("snr_db")) {
            for (const auto& v : sim.at("snr_db")) {
                if (!v.is_number()) {
                    throw ParseError("'simulation.snr_db' entries must be numbers");
                }
                cfg.simulation.snr_db.push_back(v.get<double>());
            }
        }
    }

    if (top.has("output")) {
        const Reader out(top.at("output"), "output");
        cfg.out_dir = loader.resolve(out.string("dir", "out"));
        cfg.format = parse_format(out.string("format", "csv+svg"));
    } else {
        cfg.out_dir = loader.resolve("out");
    }
    if (overrides.out_dir) {
        cfg.out_dir = *overrides.out_dir;
    }
    if (overrides.format) {
        cfg.format = *overrides.format;
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path, const Overrides& overrides)
{
    const json doc = read_json(path);
    auto cfg = parse_config(doc, path.parent_path(), overrides);
    cfg.inputs.insert(cfg.inputs.begin(), InputDigest{path.string(), sha256_file(path)});
    return cfg;
}

nlohmann::json ExperimentConfig::resolved() const
{
    json streams_json = json::array();
    for (const auto& s : streams) {
        streams_json.push_back({{"name", s.name},
                                {"bits", s.bits},
                                {"modulation", s.modulation.name},
                                {"M", s.modulation.order},
                                {"a", s.modulation.a},
                                {"b", s.modulation.b},
                                {"curve", io::to_json(s.curve)}});
    }
    json solvers_json = json::array();
    for (auto k : solvers) {
        solvers_json.push_back(to_string(k));
    }
    json doc = {
        {"seed", seed},
        {"channel",
         {{"h0_db", channel.h0_db},
          {"d_m", channel.d_m},
          {"d0_m", channel.d0_m},
          {"alpha", channel.alpha},
          {"noise_dbm", channel.noise_dbm},
          {"fading", to_string(fading)},
          {"seed", channel_seed},
          {"independent", independent_fading}}},
        {"streams", streams_json},
        {"surface", io::to_json(surface)},
        {"targets", targets},
        {"solvers", solvers_json},
        {"grid_n", grid_n},
        {"cost_basis", to_string(cost_basis)},
        {"tolerance", {{"abs_tol", tol.abs_tol}, {"rel_tol", tol.rel_tol}, {"max_iter", tol.max_iter}}},
        {"output", {{"dir", out_dir.string()}, {"format", to_string(format)}}},
    };
    if (!sweep_modulations.empty()) {
        doc["sweep"] = {{"modulations", sweep_modulations}};
    }
    if (simulation.present) {
        doc["simulation"] = {{"n_bits", simulation.n_bits},
                             {"solver", to_string(simulation.solver)},
                             {"snr_db", simulation.snr_db}};
    }
    return doc;
}

ProblemSpec ExperimentConfig::problem(double target) const
{
    const auto channels = realize_channels(channel, fading, RandomSeed{channel_seed}, 2, independent_fading);
    ProblemSpec p;
    for (std::size_t i = 0; i < 2; ++i) {
        p.streams[i] = StreamSpec{streams[i].name, streams[i].bits, streams[i].modulation, channels[i],
                                  streams[i].curve};
    }
    p.surface = surface;
    p.target = target;
    p.tol = tol;
    p.cost_basis = cost_basis;
    return p;
}

} // namespace semalloc::app
