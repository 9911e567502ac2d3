#include "fracback/bench.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <future>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "fracback/error.hpp"
#include "fracback/io.hpp"

namespace fracback {

using json = nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

InitialData make_initial_data(const std::string& name, int dim) {
    require(dim == 1 || dim == 2, ErrorKind::InvalidArgument, "dimension must be 1 or 2");
    if (name == "smooth_sine") {
        if (dim == 1) return {name, [](const Point& p) { return std::sin(2 * pi * p[0]); }, QuadratureRule::Smooth};
        return {name, [](const Point& p) { return std::sin(2 * pi * p[0]) * std::sin(2 * pi * p[1]); },
                QuadratureRule::Smooth};
    }
    if (name == "checkerboard") {
        // closed squares [0,1/2]^2 and [1/2,1]^2; in 1D the indicator of [0,1/2]
        if (dim == 1) return {name, [](const Point& p) { return p[0] <= 0.5 ? 1.0 : 0.0; }, QuadratureRule::Discontinuous};
        return {name,
                [](const Point& p) {
                    const bool low = p[0] <= 0.5 && p[1] <= 0.5;
                    const bool high = p[0] >= 0.5 && p[1] >= 0.5;
                    return low || high ? 1.0 : 0.0;
                },
                QuadratureRule::Discontinuous};
    }
    const std::string prefix = "eigenmode:";
    if (name.rfind(prefix, 0) == 0) {
        const std::string rest = name.substr(prefix.size());
        int k = 0, l = 0;
        char extra = 0;
        const int got = std::sscanf(rest.c_str(), "%d,%d%c", &k, &l, &extra);
        require(got == 1 || got == 2, ErrorKind::InvalidArgument, "malformed initial data '" + name + "'");
        if (got == 1) l = k;
        require(k >= 1 && l >= 1, ErrorKind::InvalidArgument, "mode indices must be positive");
        require(dim == 2 || got == 1, ErrorKind::InvalidArgument, "1D eigenmode takes one index");
        if (dim == 1) return {name, [k](const Point& p) { return std::sin(k * pi * p[0]); }, QuadratureRule::Smooth};
        return {name, [k, l](const Point& p) { return std::sin(k * pi * p[0]) * std::sin(l * pi * p[1]); },
                QuadratureRule::Smooth};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown initial data '" + name + "'");
}

NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "paper_pointwise") return NoiseMode::PaperPointwise;
    if (s == "exact_l2") return NoiseMode::ExactL2;
    if (s == "scalar") return NoiseMode::Scalar;
    throw Error(ErrorKind::InvalidArgument, "unknown noise mode '" + s + "'");
}

std::string to_string(NoiseMode m) {
    switch (m) {
        case NoiseMode::PaperPointwise: return "paper_pointwise";
        case NoiseMode::ExactL2: return "exact_l2";
        case NoiseMode::Scalar: return "scalar";
    }
    return "?";
}

NoisePlacement parse_noise_placement(const std::string& s) {
    if (s == "reference") return NoisePlacement::Reference;
    if (s == "coarse") return NoisePlacement::Coarse;
    throw Error(ErrorKind::InvalidArgument, "unknown noise placement '" + s + "'");
}

std::string to_string(NoisePlacement p) { return p == NoisePlacement::Reference ? "reference" : "coarse"; }

ExperimentSpec default_spec(int dim) {
    ExperimentSpec spec;
    spec.dim = dim;
    spec.n_ref = dim == 1 ? 512 : 128;
    spec.N_ref = dim == 1 ? 1000 : 500;
    spec.backward.spectral_fast_path = true;
    return spec;
}

void validate(const ExperimentSpec& spec) {
    require(spec.dim == 1 || spec.dim == 2, ErrorKind::InvalidArgument, "dim must be 1 or 2");
    for (double a : spec.alphas.empty() ? std::vector<double>{spec.alpha} : spec.alphas)
        require(a > 0.0 && a < 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    require(spec.T > 0.0, ErrorKind::InvalidArgument, "T must be positive");
    require(spec.n_ref >= 2 && spec.N_ref >= 1, ErrorKind::InvalidArgument, "reference grid too small");
    require(spec.repetitions >= 1, ErrorKind::InvalidArgument, "repetitions must be at least 1");
    require(spec.noise.delta >= 0.0, ErrorKind::InvalidArgument, "delta must be non-negative");
    for (double d : spec.deltas) require(d > 0.0 && d < 1.0, ErrorKind::InvalidArgument, "deltas must lie in (0,1)");
    if (spec.mesh_n) require(*spec.mesh_n >= 2, ErrorKind::InvalidArgument, "mesh_n must be at least 2");
    if (spec.steps) require(*spec.steps >= 1, ErrorKind::InvalidArgument, "steps must be at least 1");
    if (spec.gamma) require(*spec.gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
    require(spec.preset.empty() || spec.preset == "paper-ex1" || spec.preset == "paper-ex2",
            ErrorKind::InvalidArgument, "unknown preset '" + spec.preset + "'");
    make_nonlinearity(spec.nonlinearity, spec.nonlinearity_scale);
    make_initial_data(spec.initial_data, spec.dim);
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, "field '" + key + "' has the wrong type: " + e.what());
    }
}

}  // namespace

ExperimentSpec spec_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("malformed experiment JSON: ") + e.what());
    }
    require(doc.is_object(), ErrorKind::InvalidArgument, "experiment JSON must be an object");
    const int dim = doc.contains("dim") ? get_as<int>(doc["dim"], "dim") : 2;
    ExperimentSpec s = default_spec(dim);
    auto& b = s.backward;
    for (const auto& [key, v] : doc.items()) {
        if (key == "dim") continue;
        else if (key == "alpha") s.alpha = get_as<double>(v, key);
        else if (key == "alphas") s.alphas = get_as<std::vector<double>>(v, key);
        else if (key == "T") s.T = get_as<double>(v, key);
        else if (key == "nonlinearity") s.nonlinearity = get_as<std::string>(v, key);
        else if (key == "nonlinearity_scale") s.nonlinearity_scale = get_as<double>(v, key);
        else if (key == "initial_data") s.initial_data = get_as<std::string>(v, key);
        else if (key == "mesh_n") s.mesh_n = get_as<int>(v, key);
        else if (key == "steps") s.steps = get_as<int>(v, key);
        else if (key == "n_ref") s.n_ref = get_as<int>(v, key);
        else if (key == "N_ref") s.N_ref = get_as<int>(v, key);
        else if (key == "delta") s.noise.delta = get_as<double>(v, key);
        else if (key == "deltas") s.deltas = get_as<std::vector<double>>(v, key);
        else if (key == "noise_mode") s.noise.mode = parse_noise_mode(get_as<std::string>(v, key));
        else if (key == "noise_placement") s.noise.placement = parse_noise_placement(get_as<std::string>(v, key));
        else if (key == "seed") s.noise.seed = get_as<std::uint64_t>(v, key);
        else if (key == "preset") s.preset = get_as<std::string>(v, key);
        else if (key == "gamma") s.gamma = get_as<double>(v, key);
        else if (key == "fp_tol") b.fp_tol = get_as<double>(v, key);
        else if (key == "fp_max") b.fp_max = get_as<int>(v, key);
        else if (key == "cg_tol") b.cg_tol = get_as<double>(v, key);
        else if (key == "cg_max") b.cg_max = get_as<int>(v, key);
        else if (key == "spectral_fast_path") b.spectral_fast_path = get_as<bool>(v, key);
        else if (key == "random_init_seed") b.random_init_seed = get_as<std::uint64_t>(v, key);
        else if (key == "repetitions") s.repetitions = get_as<int>(v, key);
        else if (key == "record_history") s.record_history = get_as<bool>(v, key);
        else if (key == "output_dir") s.output_dir = get_as<std::string>(v, key);
        else if (key == "paper_scale") s.paper_scale = get_as<bool>(v, key);
        else throw Error(ErrorKind::InvalidArgument, "unknown field '" + key + "' in experiment JSON");
    }
    if (s.paper_scale && s.dim == 2 && !doc.contains("n_ref") && !doc.contains("N_ref")) {
        s.n_ref = 256;
        s.N_ref = 1000;
    }
    validate(s);
    return s;
}

std::string spec_to_json(const ExperimentSpec& s) {
    json doc;
    doc["dim"] = s.dim;
    doc["alpha"] = s.alpha;
    if (!s.alphas.empty()) doc["alphas"] = s.alphas;
    doc["T"] = s.T;
    doc["nonlinearity"] = s.nonlinearity;
    doc["nonlinearity_scale"] = s.nonlinearity_scale;
    doc["initial_data"] = s.initial_data;
    if (s.mesh_n) doc["mesh_n"] = *s.mesh_n;
    if (s.steps) doc["steps"] = *s.steps;
    doc["n_ref"] = s.n_ref;
    doc["N_ref"] = s.N_ref;
    doc["delta"] = s.noise.delta;
    if (!s.deltas.empty()) doc["deltas"] = s.deltas;
    doc["noise_mode"] = to_string(s.noise.mode);
    doc["noise_placement"] = to_string(s.noise.placement);
    doc["seed"] = s.noise.seed;
    if (!s.preset.empty()) doc["preset"] = s.preset;
    if (s.gamma) doc["gamma"] = *s.gamma;
    doc["fp_tol"] = s.backward.fp_tol;
    doc["fp_max"] = s.backward.fp_max;
    doc["cg_tol"] = s.backward.cg_tol;
    doc["cg_max"] = s.backward.cg_max;
    doc["spectral_fast_path"] = s.backward.spectral_fast_path;
    if (s.backward.random_init_seed) doc["random_init_seed"] = *s.backward.random_init_seed;
    doc["repetitions"] = s.repetitions;
    doc["record_history"] = s.record_history;
    doc["output_dir"] = s.output_dir;
    doc["paper_scale"] = s.paper_scale;
    return doc.dump(2);
}

ResolvedRun resolve(const ExperimentSpec& spec, double delta) {
    ResolvedRun r;
    r.delta = delta;
    if (!spec.preset.empty()) {
        require(delta > 0.0, ErrorKind::InvalidArgument, "presets need a positive delta");
        const auto choice = select_parameters(delta, 2.0, 1.0, spec.preset);
        const auto [n, N] = discretize(choice, spec.T);
        r.gamma = choice.gamma;
        r.n = n;
        r.N = N;
    }
    if (spec.gamma) r.gamma = *spec.gamma;
    if (spec.mesh_n) r.n = *spec.mesh_n;
    if (spec.steps) r.N = *spec.steps;
    require(r.gamma > 0.0 && r.n >= 2 && r.N >= 1, ErrorKind::InvalidArgument,
            "gamma, mesh_n and steps must be given explicitly when no preset is set");
    r.h = 1.0 / r.n;
    r.tau = spec.T / r.N;
    return r;
}

// caches

namespace {

template <typename Value>
class OnceMap {
public:
    template <typename Make>
    std::shared_ptr<const Value> get(const std::string& key, Make make) {
        std::shared_future<std::shared_ptr<const Value>> fut;
        std::promise<std::shared_ptr<const Value>> promise;
        bool owner = false;
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                fut = promise.get_future().share();
                entries_.emplace(key, fut);
                owner = true;
            } else {
                fut = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(make());
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_future<std::shared_ptr<const Value>>> entries_;
};

}  // namespace

struct ExperimentCache::Impl {
    OnceMap<Reference> references;
    OnceMap<FemSystem> systems;
    OnceMap<SpectralBasis> bases;
};

ExperimentCache::ExperimentCache() : impl_(std::make_unique<Impl>()) {}
ExperimentCache::~ExperimentCache() = default;

std::shared_ptr<const FemSystem> ExperimentCache::system(int dim, int n) {
    const std::string key = std::to_string(dim) + ":" + std::to_string(n);
    return impl_->systems.get(key, [dim, n] { return std::make_shared<const FemSystem>(assemble(build_mesh(dim, n))); });
}

std::shared_ptr<const SpectralBasis> ExperimentCache::basis(int dim, int n) {
    const auto sys = system(dim, n);
    const std::string key = std::to_string(dim) + ":" + std::to_string(n);
    return impl_->bases.get(key, [sys] { return std::make_shared<const SpectralBasis>(*sys); });
}

std::shared_ptr<const Reference> ExperimentCache::reference(const ExperimentSpec& spec) {
    const std::string key = std::to_string(spec.dim) + "|" + std::to_string(spec.n_ref) + "|" +
                            std::to_string(spec.N_ref) + "|" + format_double(spec.alpha) + "|" +
                            format_double(spec.T) + "|" + spec.nonlinearity + "|" +
                            format_double(spec.nonlinearity_scale) + "|" + spec.initial_data;
    return impl_->references.get(key, [&spec] {
        auto ref = std::make_shared<Reference>();
        ref->sys = assemble(build_mesh(spec.dim, spec.n_ref));
        const auto data = make_initial_data(spec.initial_data, spec.dim);
        const GridFunction u0 = l2_project(ref->sys, data.u0, data.rule);
        const auto f = make_nonlinearity(spec.nonlinearity, spec.nonlinearity_scale);
        const ForwardSolver solver(ref->sys, make_time_grid(spec.T, spec.N_ref, spec.alpha));
        ref->terminal = solver.terminal(u0, f);
        ref->node_values = node_values(ref->sys, ref->terminal);
        return std::shared_ptr<const Reference>(std::move(ref));
    });
}

// observation

Observation make_observation(const ExperimentSpec& spec, const FemSystem& coarse, ExperimentCache& cache) {
    require(coarse.mesh.dim == spec.dim, ErrorKind::InvalidArgument, "coarse mesh dimension differs from spec");
    const auto ref = cache.reference(spec);
    const bool on_reference = spec.noise.placement == NoisePlacement::Reference;

    Observation obs;
    obs.g_clean = on_reference ? transfer_l2(ref->sys.mesh, ref->node_values, coarse)
                               : transfer_nodal(ref->sys.mesh, ref->node_values, coarse);
    obs.g_noisy = obs.g_clean;
    const double delta = spec.noise.delta;
    if (delta == 0.0) return obs;

    // sup over the grid where the noise lives
    const GridFunction& base = on_reference ? ref->terminal : obs.g_clean;
    obs.sup_g = base.maxCoeff();
    if (!(obs.sup_g > 0.0)) obs.sup_g = base.cwiseAbs().maxCoeff();
    const double amplitude = delta * obs.sup_g;

    std::mt19937_64 rng(spec.noise.seed);
    std::normal_distribution<double> normal;
    const Eigen::Index count = base.size();
    Vector eps(count);
    if (spec.noise.mode == NoiseMode::Scalar)
        eps.setConstant(normal(rng));
    else
        for (Eigen::Index i = 0; i < count; ++i) eps[i] = normal(rng);

    GridFunction perturbation;
    if (on_reference) {
        const std::vector<double> nodes = node_values(ref->sys, amplitude * eps);
        perturbation = transfer_l2(ref->sys.mesh, nodes, coarse);
    } else {
        perturbation = amplitude * eps;
    }
    if (spec.noise.mode == NoiseMode::ExactL2) {
        const double norm = l2_norm(coarse, perturbation);
        require(norm > 0.0, ErrorKind::NumericalFailure, "noise field vanished on the coarse mesh");
        perturbation *= delta / norm;
    }
    obs.g_noisy = obs.g_clean + perturbation;
    obs.achieved_noise_l2 = l2_norm(coarse, perturbation);
    return obs;
}

Observation make_observation(const ExperimentSpec& spec) {
    ExperimentCache cache;
    const auto r = resolve(spec, spec.noise.delta);
    return make_observation(spec, *cache.system(spec.dim, r.n), cache);
}

// reconstruction

RunRow run_reconstruction(const ExperimentSpec& spec, ExperimentCache& cache) {
    const auto start = std::chrono::steady_clock::now();
    validate(spec);
    RunRow row;
    row.alpha = spec.alpha;
    row.seed = spec.noise.seed;
    row.params = resolve(spec, spec.noise.delta);

    const auto sys = cache.system(spec.dim, row.params.n);
    const auto obs = make_observation(spec, *sys, cache);
    row.achieved_noise_l2 = obs.achieved_noise_l2;

    const auto data = make_initial_data(spec.initial_data, spec.dim);
    const GridFunction truth = l2_project(*sys, data.u0, data.rule);

    BackwardConfig cfg = spec.backward;
    cfg.gamma = row.params.gamma;
    cfg.record_history = true;
    std::shared_ptr<const SpectralBasis> basis;
    if (cfg.spectral_fast_path && sys->dofs() <= cfg.spectral_max_dofs) basis = cache.basis(spec.dim, row.params.n);
    const BackwardSolver solver(*sys, make_time_grid(spec.T, row.params.N, spec.alpha), cfg, basis);
    const auto f = make_nonlinearity(spec.nonlinearity, spec.nonlinearity_scale);
    row.result = solver.reconstruct(obs.g_noisy, f, &truth);
    row.e_u = l2_error(*sys, row.result.u0_hat, truth);
    if (spec.record_history) row.field_csv = field_csv(*sys, row.result.u0_hat);
    row.runtime_s = seconds_since(start);
    return row;
}

RunRow run_reconstruction(const ExperimentSpec& spec) {
    ExperimentCache cache;
    return run_reconstruction(spec, cache);
}

std::uint64_t row_seed(std::uint64_t master, std::size_t row) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(static_cast<std::uint64_t>(row) >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

unsigned worker_threads() {
    unsigned count = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FRACBACK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) count = static_cast<unsigned>(v);
    }
    return count;
}

TableResult run_table(const ExperimentSpec& spec, ExperimentCache& cache) {
    const auto start = std::chrono::steady_clock::now();
    validate(spec);
    require(!spec.deltas.empty(), ErrorKind::InvalidArgument, "table sweep needs at least one delta");
    TableResult table;
    table.alphas = spec.alphas.empty() ? std::vector<double>{spec.alpha} : spec.alphas;
    table.deltas = spec.deltas;

    std::vector<ExperimentSpec> jobs;
    for (double alpha : table.alphas) {
        for (double delta : table.deltas) {
            for (int rep = 0; rep < spec.repetitions; ++rep) {
                ExperimentSpec job = spec;
                job.alpha = alpha;
                job.alphas.clear();
                job.deltas.clear();
                job.noise.delta = delta;
                job.noise.seed = row_seed(spec.noise.seed, jobs.size());
                jobs.push_back(std::move(job));
            }
        }
    }
    table.rows.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                table.rows[i] = run_reconstruction(jobs[i], cache);
                table.rows[i].index = i;
                table.rows[i].repetition = static_cast<int>(i % spec.repetitions);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::min<std::size_t>(worker_threads(), jobs.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    const std::size_t per_alpha = table.deltas.size() * spec.repetitions;
    for (std::size_t a = 0; a < table.alphas.size(); ++a) {
        std::vector<double> means;
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t d = 0; d < table.deltas.size(); ++d) {
            double sum = 0.0;
            for (int rep = 0; rep < spec.repetitions; ++rep)
                sum += table.rows[a * per_alpha + d * spec.repetitions + rep].e_u;
            means.push_back(sum / spec.repetitions);
            pairs.emplace_back(table.deltas[d], means.back());
        }
        table.mean_error.push_back(means);
        table.orders.push_back(pairs.size() >= 2 ? convergence_order(pairs) : std::vector<double>{});
    }
    table.wall_time_s = seconds_since(start);
    return table;
}

TableResult run_table(const ExperimentSpec& spec) {
    ExperimentCache cache;
    return run_table(spec, cache);
}

// outputs

namespace {

std::string column_label(double delta) {
    const double k = 1.0 / delta;
    if (std::abs(k - std::round(k)) < 1e-9 * k) return "K=" + std::to_string(std::lround(k));
    return "delta=" + format_double(delta);
}

}  // namespace

std::string table_csv(const TableResult& table) {
    std::string out = "row";
    for (double d : table.deltas) out += "," + column_label(d);
    out += "\n";
    for (std::size_t a = 0; a < table.alphas.size(); ++a) {
        out += "alpha=" + fixed("%g", table.alphas[a]);
        for (double e : table.mean_error[a]) out += "," + fixed("%.4e", e);
        out += "\norder,-";
        for (double o : table.orders[a]) out += "," + fixed("%.4f", o);
        out += "\n";
    }
    return out;
}

std::string rows_csv(const TableResult& table) {
    std::string out =
        "row,alpha,delta,repetition,seed,gamma,h,tau,n,N,e_u,outer_iters,converged,diverged,achieved_noise_l2\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.index) + "," + format_double(r.alpha) + "," + format_double(r.params.delta) + "," +
               std::to_string(r.repetition) + "," + std::to_string(r.seed) + "," + format_double(r.params.gamma) +
               "," + format_double(r.params.h) + "," + format_double(r.params.tau) + "," + std::to_string(r.params.n) +
               "," + std::to_string(r.params.N) + "," + format_double(r.e_u) + "," +
               std::to_string(r.result.outer_iters) + "," + (r.result.converged ? "1" : "0") + "," +
               (r.result.diverged ? "1" : "0") + "," + format_double(r.achieved_noise_l2) + "\n";
    }
    return out;
}

std::string history_csv(const ReconstructionResult& result) {
    std::string out = "iter,update_norm,error_vs_truth,cg_iters,cumulative_forward_solves\n";
    for (const auto& h : result.history) {
        out += std::to_string(h.iter) + "," + format_double(h.update_norm) + "," +
               (h.error_vs_truth ? format_double(*h.error_vs_truth) : std::string()) + "," +
               std::to_string(h.cg_iters) + "," + std::to_string(h.forward_solves) + "\n";
    }
    return out;
}

std::string manifest_json(const ExperimentSpec& spec, const TableResult& table) {
    json doc;
    doc["toolkit_version"] = toolkit_version;
    doc["spec"] = json::parse(spec_to_json(spec));
    doc["wall_time_s"] = table.wall_time_s;
    json rows = json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"row", r.index}, {"runtime_s", r.runtime_s}, {"stop_reason", r.result.stop_reason}});
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_table_outputs(const ExperimentSpec& spec, const TableResult& table,
                                                       const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& name, const std::string& content) {
        write_text(dir / name, content);
        written.push_back(dir / name);
    };
    put("table.csv", table_csv(table));
    put("rows.csv", rows_csv(table));
    if (spec.record_history) {
        for (const auto& r : table.rows) {
            put("history_" + std::to_string(r.index) + ".csv", history_csv(r.result));
            put("field_u0hat_" + std::to_string(r.index) + ".csv", r.field_csv);
        }
    }
    put("manifest.json", manifest_json(spec, table));
    return written;
}

RunRow run_iteration_history(const ExperimentSpec& spec, ExperimentCache& cache) {
    ExperimentSpec s = spec;
    s.record_history = true;
    return run_reconstruction(s, cache);
}

RunRow run_iteration_history(const ExperimentSpec& spec) {
    ExperimentCache cache;
    return run_iteration_history(spec, cache);
}

}  // namespace fracback
