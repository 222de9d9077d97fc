#include "steinmc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "steinmc/baselines.hpp"
#include "steinmc/errors.hpp"
#include "steinmc/gaussian_mixture.hpp"
#include "steinmc/igarch.hpp"
#include "steinmc/kernel.hpp"
#include "steinmc/spmcmc.hpp"

namespace steinmc {

namespace {

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError(what + ": bad number '" + cell + "'");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

PresetTarget make_preset_target(const ExperimentConfig& cfg) {
  PresetTarget out;
  if (cfg.preset == "gaussian-mixture") {
    out.target = std::make_unique<GaussianMixture>(GaussianMixture::symmetric_bimodal());
    out.descriptor = "gaussian-mixture";
    out.start = Vector::Zero(2);
  } else if (cfg.preset == "toy-gauss") {
    out.target = std::make_unique<GaussianMixture>(GaussianMixture::isotropic(cfg.toy_dim, cfg.toy_sigma));
    out.descriptor = "toy-gauss(sigma=" + format_double(cfg.toy_sigma) + ",d=" + std::to_string(cfg.toy_dim) + ")";
    out.start = Vector::Zero(cfg.toy_dim);
  } else if (cfg.preset == "custom") {
    const std::vector<double> weights = parse_list(cfg.custom_weights, "custom.weights");
    PointSet means;
    std::stringstream ss(cfg.custom_means);
    std::string mean;
    while (std::getline(ss, mean, ';')) means.push_back(to_vector(parse_list(mean, "custom.means")));
    if (means.size() != weights.size()) throw ConfigError("custom.means and custom.weights differ in length");
    const Index d = means.front().size();
    std::vector<Matrix> covs(weights.size(), cfg.custom_variance * Matrix::Identity(d, d));
    out.start = Vector::Zero(d);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      require_dim(d, means[j].size(), "custom mean");
      out.start += weights[j] * means[j];
    }
    out.target = std::make_unique<GaussianMixture>(weights, means, covs);
    out.descriptor = "custom(weights=" + cfg.custom_weights + ",means=" + cfg.custom_means +
                     ",variance=" + format_double(cfg.custom_variance) + ")";
  } else if (cfg.preset == "igarch-synthetic" || cfg.preset == "igarch-csv") {
    std::vector<double> returns;
    if (cfg.preset == "igarch-synthetic") {
      Rng data_rng = substream(cfg.igarch_data_seed, "igarch-data");
      returns = igarch_synthesize(Vector{{cfg.igarch_theta1, cfg.igarch_theta2}},
                                  static_cast<std::size_t>(cfg.igarch_T), data_rng)
                    .returns;
      out.descriptor = "igarch-synthetic(theta=" + format_double(cfg.igarch_theta1) + "," +
                       format_double(cfg.igarch_theta2) + ",T=" + std::to_string(cfg.igarch_T) +
                       ",data_seed=" + std::to_string(cfg.igarch_data_seed) + ")";
    } else {
      returns = read_series_csv(cfg.igarch_csv);
      out.descriptor = "igarch-csv(" + std::filesystem::weakly_canonical(cfg.igarch_csv).string() + ")";
    }
    out.target = std::make_unique<IgarchPosterior>(std::move(returns));
    out.start = to_vector(parse_list(cfg.igarch_start, "igarch.start"));
    require_dim(2, out.start.size(), "igarch.start");
  } else {
    throw ConfigError("unknown preset '" + cfg.preset + "'");
  }
  if (!out.target->in_support(out.start)) throw ConfigError("preset start point lies outside the support");
  return out;
}

namespace {

struct Pilot {
  Matrix lambda;
  Vector mean;
  MarkovKernelConfig proposal;
  ChainState last;
};

// Two rounds of (step-size search, adaptation, covariance estimate); the second
// round proposes with the first round's covariance. Not charged to the method.
Pilot run_pilot(const ExperimentConfig& cfg, const Target& target, const Vector& start) {
  CountedTarget pilot(target);
  Rng rng = substream(cfg.seed, "pilot");
  const ProposalKind kind = cfg.proposal == "rwm" ? ProposalKind::Rwm : ProposalKind::Mala;
  const Index d = target.dim();
  MarkovKernelConfig k0(kind, 1.0, Matrix::Identity(d, d));
  const ChainState s0 = initial_state(pilot, start);
  k0 = find_initial_step_size(k0, pilot, s0, rng);
  const PreconditionerEstimate first =
      estimate_preconditioner(pilot, k0, start, cfg.warmup, cfg.preconditioner_chain, rng);
  MarkovKernelConfig k1 = first.tuned.with_proposal_cov(first.lambda).with_step_size(1.0);
  k1 = find_initial_step_size(k1, pilot, first.last, rng);
  const PreconditionerEstimate second =
      estimate_preconditioner(pilot, k1, first.last.x, cfg.warmup, cfg.preconditioner_chain, rng);
  return {second.lambda, second.mean, second.tuned.with_proposal_cov(second.lambda), second.last};
}

Imq make_kernel(const ExperimentConfig& cfg, const Pilot& pilot, Index d) {
  if (cfg.lambda_mode == "identity") return Imq::identity(d, cfg.beta);
  if (cfg.lambda_mode == "scaled-identity") return Imq(cfg.lambda_scale * Matrix::Identity(d, d), cfg.beta);
  return Imq(pilot.lambda, cfg.beta);
}

struct EnergyCheckpoint {
  int iteration;
  std::size_t n_points;
  std::uint64_t n_eval;
  double energy;
};

struct MethodOutput {
  ExperimentTrace trace;
  PointSet points;
  double final_ksd = 0;
  std::vector<EnergyCheckpoint> energy;
};

// Replays adds/removes of a greedy trace and evaluates the energy distance every
// `every` points and at the end.
std::vector<EnergyCheckpoint> energy_from_trace(const ExperimentTrace& trace, const ReferenceSample& ref, int every) {
  std::vector<EnergyCheckpoint> out;
  PointSet current;
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const TraceRecord& r = trace.records[k];
    if (r.action == TraceAction::Add) {
      current.push_back(r.point);
    } else {
      current.erase(current.begin() + static_cast<std::ptrdiff_t>(r.removed_index));
    }
    const bool last = k + 1 == trace.records.size();
    if ((r.action == TraceAction::Add && current.size() % static_cast<std::size_t>(every) == 0) || last) {
      out.push_back({r.iteration, current.size(), r.n_eval, energy_distance(current, ref)});
    }
  }
  return out;
}

ExperimentTrace trace_from_sequence(const PointSet& points, const PointSet& scores,
                                    const std::vector<std::uint64_t>& n_eval, const SteinKernel& ctx,
                                    const TraceClock& clock) {
  ExperimentTrace trace;
  QuantisationState state(ctx);
  for (std::size_t i = 0; i < points.size(); ++i) {
    state.commit_add(points[i], scores[i]);
    TraceRecord rec;
    rec.iteration = static_cast<int>(i) + 1;
    rec.point = points[i];
    rec.set_size = state.size();
    rec.ksd = state.ksd();
    rec.n_eval = n_eval[i];
    rec.elapsed_s = clock.seconds();
    if (i > 0) rec.jump_sq = (points[i] - points[i - 1]).squaredNorm();
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

double ksd_of(const PointSet& points, const PointSet& scores, const SteinKernel& ctx) {
  QuantisationState state(ctx);
  for (std::size_t i = 0; i < points.size(); ++i) state.commit_add(points[i], scores[i]);
  return state.ksd();
}

PointSet scores_for(const PointSet& points, const Target& target) {
  PointSet out;
  out.reserve(points.size());
  for (const Vector& x : points) out.push_back(target.score(x));
  return out;
}

MethodOutput run_method(const ExperimentConfig& cfg, const Target& target, CountedTarget& counted, const Pilot& pilot,
                        const SteinKernel& ctx, const ReferenceSample* ref) {
  MethodOutput out;
  const auto n = static_cast<std::size_t>(cfg.n);
  const TraceClock clock;

  if (cfg.method == "spmcmc") {
    SpMcmcConfig sp;
    sp.n = n;
    sp.m_schedule = constant_schedule(cfg.m);
    sp.crit = parse_criterion(cfg.crit);
    sp.candidate_source =
        cfg.candidates == "iid" ? CandidateSource::iid_exact() : CandidateSource::chain(pilot.proposal);
    if (cfg.removal == "away") sp.removal = RemovalPolicy::away();
    if (cfg.removal == "drop") sp.removal = RemovalPolicy::drop(cfg.drop_rate);
    sp.x1 = pilot.last.x;
    Rng rng = substream(cfg.seed, "chain");
    QuantisationResult res = spmcmc_run(sp, counted, ctx, rng);
    out.points = res.state.points();
    out.final_ksd = res.state.ksd();
    out.trace = std::move(res.trace);
  } else if (cfg.method == "sp") {
    Rng rng = substream(cfg.seed, "search");
    const AdaptiveSearchConfig search = AdaptiveSearchConfig::with_defaults(pilot.mean, pilot.lambda, cfg.m);
    QuantisationResult res = sp_run(search, counted, ctx, n, rng);
    out.points = res.state.points();
    out.final_ksd = res.state.ksd();
    out.trace = std::move(res.trace);
  } else if (cfg.method == "med") {
    Rng rng = substream(cfg.seed, "search");
    const AdaptiveSearchConfig search = AdaptiveSearchConfig::with_defaults(pilot.mean, pilot.lambda, cfg.m);
    const MedResult res = med_run(search, counted, n, rng);
    // KSD is a diagnostic here; its scores are not charged to MED.
    const PointSet scores = scores_for(res.points, target);
    out.trace = trace_from_sequence(res.points, scores, res.n_eval, ctx, clock);
    out.points = res.points;
    out.final_ksd = out.trace.records.back().ksd;
  } else if (cfg.method == "mcmc") {
    Rng rng = substream(cfg.seed, "chain");
    const std::vector<ChainState> kept = mcmc_thin_run(pilot.proposal, counted, pilot.last.x, n, cfg.m, rng);
    PointSet points, scores;
    std::vector<std::uint64_t> n_eval;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      points.push_back(kept[k].x);
      scores.push_back(kept[k].score);
      n_eval.push_back(static_cast<std::uint64_t>((k + 1) * static_cast<std::size_t>(cfg.m)));
    }
    out.trace = trace_from_sequence(points, scores, n_eval, ctx, clock);
    out.points = std::move(points);
    out.final_ksd = out.trace.records.back().ksd;
  } else if (cfg.method == "svgd") {
    SvgdConfig sv;
    sv.n_particles = cfg.svgd_particles > 0 ? cfg.svgd_particles : cfg.n;
    sv.epsilon_master = cfg.svgd_step;
    sv.momentum = cfg.svgd_momentum;
    sv.iterations = cfg.svgd_iterations;
    const Matrix init_factor = Eigen::LLT<Matrix>(pilot.lambda).matrixL();
    const Vector init_mean = pilot.mean;
    sv.init_sampler = [&target, init_factor, init_mean](Rng& rng) {
      for (int tries = 0; tries < 1000; ++tries) {
        Vector x = init_mean + init_factor * standard_normal(init_mean.size(), rng);
        if (target.in_support(x)) return x;
      }
      throw RuntimeFailure("SVGD: could not draw an initial particle inside the support");
    };
    const int every = std::max(1, cfg.svgd_iterations / 50);
    auto observe = [&](int it, const PointSet& particles, std::uint64_t n_eval) {
      if (it % every != 0 && it != cfg.svgd_iterations) return;
      TraceRecord rec;
      rec.iteration = it;
      rec.set_size = particles.size();
      rec.ksd = ksd_of(particles, scores_for(particles, target), ctx);
      rec.n_eval = n_eval;
      rec.elapsed_s = clock.seconds();
      out.trace.records.push_back(std::move(rec));
      if (ref) out.energy.push_back({it, particles.size(), n_eval, energy_distance(particles, *ref)});
    };
    Rng rng = substream(cfg.seed, "init");
    const SvgdResult res = svgd_run(sv, counted, ctx.base(), rng, observe);
    out.points = res.particles;
    out.final_ksd = out.trace.records.empty() ? ksd_of(res.particles, scores_for(res.particles, target), ctx)
                                              : out.trace.records.back().ksd;
  }
  if (ref && cfg.method != "svgd") out.energy = energy_from_trace(out.trace, *ref, cfg.energy_every);
  return out;
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyCheckpoint>& energy) {
  CsvTable t;
  t.header = {"j", "n_points", "n_eval", "energy"};
  for (const auto& c : energy) {
    t.rows.push_back({std::to_string(c.iteration), std::to_string(c.n_points), std::to_string(c.n_eval),
                      format_double(c.energy)});
  }
  write_csv(path, t);
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void write_summary(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunSummary& s,
                   const nlohmann::json& extra) {
  nlohmann::json j = extra;
  j["status"] = s.status;
  if (!s.error.empty()) j["error"] = s.error;
  j["preset"] = cfg.preset;
  j["method"] = cfg.method;
  j["target"] = s.target;
  j["seed"] = cfg.seed;
  j["n_points"] = s.n_points;
  j["n_eval"] = s.n_eval;
  j["final_ksd"] = s.status == "ok" ? nlohmann::json(s.final_ksd) : nlohmann::json(nullptr);
  j["final_energy"] = s.final_energy ? nlohmann::json(*s.final_energy) : nlohmann::json(nullptr);
  j["wall_time_s"] = s.wall_time_s;
  j["config"] = cfg.to_map();
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "summary.json");
  out << j.dump(2) << '\n';
}

}  // namespace

ReferenceSample build_reference(const ExperimentConfig& cfg, const Target& target, std::size_t size) {
  if (size < 2) throw ConfigError("reference sample needs at least two points");
  Rng rng = substream(cfg.seed, "reference");
  Matrix points(static_cast<Index>(size), target.dim());
  if (target.has_exact_sampler()) {
    for (std::size_t i = 0; i < size; ++i) points.row(static_cast<Index>(i)) = target.sample(rng).transpose();
    return ReferenceSample(std::move(points), "exact draws, N=" + std::to_string(size));
  }
  const PresetTarget preset = make_preset_target(cfg);
  const Pilot pilot = run_pilot(cfg, target, preset.start);
  CountedTarget counted(target);
  ChainState state = pilot.last;
  for (std::size_t i = 0; i < size; ++i) {
    for (int t = 0; t < cfg.reference_thin; ++t) state = transition(state, pilot.proposal, counted, rng);
    points.row(static_cast<Index>(i)) = state.x.transpose();
  }
  std::ostringstream prov;
  prov << (pilot.proposal.kind() == ProposalKind::Mala ? "mala" : "rwm") << " h=" << pilot.proposal.step_size()
       << " thin=" << cfg.reference_thin << " N=" << size;
  return ReferenceSample(std::move(points), prov.str());
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::filesystem::path dir = cfg.resolved_output_dir();
  const PresetTarget preset = make_preset_target(cfg);
  const Target& target = *preset.target;

  RunSummary summary;
  summary.target = preset.descriptor;
  summary.output_dir = dir;
  nlohmann::json extra;
  CountedTarget counted(target);
  try {
    const Pilot pilot = run_pilot(cfg, target, preset.start);
    const SteinKernel ctx(make_kernel(cfg, pilot, target.dim()), target.dim());
    std::optional<ReferenceSample> ref;
    if (!cfg.reference_path.empty()) {
      ref = read_reference(cfg.reference_path);
      require_dim(target.dim(), ref->dim(), "reference sample");
    } else if (cfg.reference_size > 0) {
      ref = build_reference(cfg, target, static_cast<std::size_t>(cfg.reference_size));
    }
    extra["preconditioner"] = matrix_json(ctx.base().lambda());
    extra["proposal_step_size"] = pilot.proposal.step_size();
    if (ref) extra["reference"] = {{"provenance", ref->provenance()}, {"N", ref->size()}};

    MethodOutput out = run_method(cfg, target, counted, pilot, ctx, ref ? &*ref : nullptr);

    std::filesystem::create_directories(dir);
    write_trace_csv(dir / "trace.csv", out.trace, cfg.timing);
    write_points_csv(dir / "points.csv", out.points);
    if (ref) write_energy_csv(dir / "energy.csv", out.energy);
    if (cfg.method == "spmcmc") {
      const JumpStatistics js = jump_statistics(out.trace);
      auto q = [](const QuantileSummary& s) {
        return nlohmann::json{{"q25", s.q25}, {"q50", s.q50}, {"q75", s.q75}, {"mean", s.mean}, {"count", s.count}};
      };
      extra["jump_sq"] = q(js.jump_sq);
      extra["chain_disp_sq"] = q(js.chain_disp_sq);
    }
    summary.n_eval = counted.n_eval();
    summary.n_points = out.points.size();
    summary.final_ksd = out.final_ksd;
    if (!out.energy.empty()) summary.final_energy = out.energy.back().energy;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    summary.status = "failed";
    summary.error = e.what();
    summary.n_eval = counted.n_eval();
    summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_summary(dir, cfg, summary, extra);
    throw RuntimeFailure(std::string("run failed: ") + e.what());
  }
  summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_summary(dir, cfg, summary, extra);
  return summary;
}

std::vector<RunSummary> run_sweep(const ExperimentConfig& cfg, int count) {
  if (count < 1) throw ConfigError("sweep needs at least one seed");
  cfg.validate();
  const std::filesystem::path base = cfg.resolved_output_dir();
  std::vector<std::future<RunSummary>> jobs;
  for (int k = 0; k < count; ++k) {
    ExperimentConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(k);
    c.output_dir = (base / ("seed_" + std::to_string(c.seed))).string();
    jobs.push_back(std::async(std::launch::async, [c] { return run_experiment(c); }));
  }
  std::vector<RunSummary> out;
  std::exception_ptr first_error;
  for (auto& job : jobs) {
    try {
      out.push_back(job.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

CsvTable compare_runs(const std::vector<std::filesystem::path>& run_dirs, const std::string& metric) {
  if (run_dirs.size() < 2) throw ConfigError("compare needs at least two runs");
  if (metric != "ksd" && metric != "energy") throw ConfigError("unknown metric '" + metric + "'");
  std::string target;
  std::vector<std::string> labels;
  std::map<std::uint64_t, std::vector<std::string>> rows;
  for (std::size_t r = 0; r < run_dirs.size(); ++r) {
    const auto& dir = run_dirs[r];
    std::ifstream in(dir / "summary.json");
    if (!in) throw ConfigError("no summary.json in " + dir.string());
    const nlohmann::json summary = nlohmann::json::parse(in);
    if (summary.value("status", std::string("ok")) != "ok") throw ConfigError("run " + dir.string() + " failed");
    const std::string t = summary.at("target").get<std::string>();
    if (r == 0) target = t;
    if (t != target) throw ConfigError("runs target different densities: '" + target + "' vs '" + t + "'");

    std::string label = std::filesystem::path(dir).lexically_normal().filename().string();
    if (label.empty()) label = std::filesystem::path(dir).lexically_normal().parent_path().filename().string();
    if (std::find(labels.begin(), labels.end(), label) != labels.end()) label += "#" + std::to_string(r);
    labels.push_back(label);

    const CsvTable data = read_csv(dir / (metric == "ksd" ? "trace.csv" : "energy.csv"));
    const std::size_t ne = data.column("n_eval"), val = data.column(metric);
    for (const auto& row : data.rows) {
      auto& cells = rows[std::stoull(row[ne])];
      cells.resize(run_dirs.size());
      cells[r] = row[val];  // the last record at a given n_eval wins
    }
  }
  CsvTable table;
  table.header.push_back("n_eval");
  table.header.insert(table.header.end(), labels.begin(), labels.end());
  for (auto& [n_eval, cells] : rows) {
    cells.resize(run_dirs.size());
    std::vector<std::string> row{std::to_string(n_eval)};
    row.insert(row.end(), cells.begin(), cells.end());
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> final_values(const CsvTable& table) {
  std::vector<double> out;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    double v = std::nan("");
    for (const auto& row : table.rows) {
      if (!row[c].empty()) v = std::stod(row[c]);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace steinmc
