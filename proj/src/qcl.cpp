#include "gpdyn/qcl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "gpdyn/errors.hpp"

namespace gpdyn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Vec2 mean_force(const LocalSurfaces& ls, const std::array<int, 2>& pair) {
  return (ls.grad[pair[0]] + ls.grad[pair[1]]) * -0.5;
}

Complex phase_factor(const LocalSurfaces& ls, const std::array<int, 2>& pair, double half_dt, double hbar) {
  const double arg = -half_dt * (ls.w[pair[0]] - ls.w[pair[1]]) / hbar;
  return {std::cos(arg), std::sin(arg)};
}

}  // namespace

void WignerGaussianSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("initial.sigma must be positive");
  if (diabatic_state != 0 && diabatic_state != 1) throw ConfigError("initial.state must be 1 or 2");
  if (!std::isfinite(center_r.x) || !std::isfinite(center_r.y)) throw ConfigError("initial.center must be finite");
  if (!std::isfinite(center_p.x) || !std::isfinite(center_p.y)) {
    throw ConfigError("initial.momentum must be finite");
  }
}

void EnsembleConfig::validate() const {
  if (n_traj < 1) throw ConfigError("ensemble.n_traj must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("time.t_final must be >= 0");
  if (hop_cap < 0) throw ConfigError("ensemble.hop_cap must be >= 0");
  if (!(coupling_cap > 0.0)) throw ConfigError("ensemble.coupling_cap must be positive");
  if (!std::isfinite(coupling_scale)) throw ConfigError("ensemble.coupling_scale must be finite");
  histogram.validate("ensemble.histogram");
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t index)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL))) {}

TrajectoryState sample_trajectory(const ModelParams& params, const WignerGaussianSpec& spec, std::size_t index,
                                  std::size_t n_traj, TrajectoryRng& rng) {
  TrajectoryState st;
  const double pos_std = 0.5 * spec.sigma;
  const double mom_std = params.hbar / spec.sigma;
  st.phase.r = {spec.center_r.x + pos_std * rng.normal(), spec.center_r.y + pos_std * rng.normal()};
  st.phase.p = {spec.center_p.x + mom_std * rng.normal(), spec.center_p.y + mom_std * rng.normal()};

  double theta = 0.0;
  if (params.degenerate() || st.phase.r.x != 0.0 || st.phase.r.y != 0.0) theta = mixing_angle(params, st.phase.r);
  State2 dia{};
  dia[spec.diabatic_state] = 1.0;
  const State2 adi = FrameRotation(theta).apply_to_state(dia);
  const double a0 = adi[0].real();
  const double a1 = adi[1].real();

  const std::size_t n_coh = n_traj / 2;
  const std::size_t n_diag = n_traj - n_coh;
  const double u = rng.uniform();
  if (index % 2 == 0) {
    const int alpha = u < a0 * a0 ? 0 : 1;
    st.pair = {alpha, alpha};
    st.weight = static_cast<double>(n_traj) / static_cast<double>(n_diag);
  } else {
    st.pair = u < 0.5 ? std::array<int, 2>{0, 1} : std::array<int, 2>{1, 0};
    st.weight = a0 * a1 * 2.0 * static_cast<double>(n_traj) / static_cast<double>(n_coh);
  }
  return st;
}

std::vector<TrajectoryState> sample_initial_ensemble(const ModelParams& params, const WignerGaussianSpec& spec,
                                                     const EnsembleConfig& cfg) {
  params.validate();
  spec.validate();
  cfg.validate();
  std::vector<TrajectoryState> out;
  out.reserve(cfg.n_traj);
  for (std::size_t j = 0; j < cfg.n_traj; ++j) {
    TrajectoryRng rng(cfg.seed, j);
    out.push_back(sample_trajectory(params, spec, j, cfg.n_traj, rng));
  }
  return out;
}

bool momentum_jump(Vec2& p, Vec2 d1, double w_old, double w_new, double mass) {
  const double dn = norm(d1);
  if (!(dn > 0.0)) return w_new == w_old;  // no direction to rescale along
  const Vec2 dhat = d1 * (1.0 / dn);
  const double pd = dot(p, dhat);
  const double radicand = pd * pd + mass * (w_old - w_new);
  if (radicand < 0.0) return false;
  const double pd_new = std::copysign(std::sqrt(radicand), pd);
  p += dhat * (pd_new - pd);
  return true;
}

double trajectory_energy(const TrajectoryState& state, const ModelParams& params) {
  const LocalSurfaces ls = local_surfaces(params, state.phase.r);
  return dot(state.phase.p, state.phase.p) / (2.0 * params.mass) +
         0.5 * (ls.w[state.pair[0]] + ls.w[state.pair[1]]);
}

StepEvents trotter_step(TrajectoryState& st, const ModelParams& params, const StepOptions& opts,
                        TrajectoryRng& rng) {
  StepEvents ev;
  if (!st.alive) return ev;
  const double dt = opts.dt;
  const double mass = params.mass;
  const double hbar = params.hbar;

  const LocalSurfaces start = local_surfaces(params, st.phase.r);
  if (!st.diagonal()) st.weight *= phase_factor(start, st.pair, 0.5 * dt, hbar);

  // Velocity Verlet on the mean surface of the pair.
  st.phase.p += mean_force(start, st.pair) * (0.5 * dt);
  st.phase.r += st.phase.p * (dt / mass);
  const LocalSurfaces end = local_surfaces(params, st.phase.r);
  st.phase.p += mean_force(end, st.pair) * (0.5 * dt);

  const Vec2 d1 = end.d1 * opts.coupling_scale;
  if (end.singular || !(norm(d1) <= opts.coupling_cap)) {
    st.alive = false;
    ev.died = true;
    return ev;
  }

  if (st.transitions_enabled && st.hops < opts.hop_cap) {
    const double vd = dot(st.phase.p, d1) / mass;
    const double delta = std::abs(vd) * dt;
    if (delta > 0.0) {
      ev.attempted = true;
      const double prob = delta / (1.0 + delta);
      if (rng.uniform() < prob) {
        const int slot = rng.uniform() < 0.5 ? 0 : 1;
        const int from = st.pair[slot];
        const int to = 1 - from;
        bool accepted = true;
        if (opts.momentum_jump) accepted = momentum_jump(st.phase.p, d1, end.w[from], end.w[to], mass);
        if (accepted) {
          const double coupling = (to == 0 ? -vd : vd) * dt;
          st.weight *= coupling / (0.5 * prob);
          st.pair[slot] = to;
          ++st.hops;
          ev.hopped = true;
          if (st.hops >= opts.hop_cap) {
            st.transitions_enabled = false;
            ev.froze = true;
          }
        } else {
          ev.frustrated = true;
          st.weight /= (1.0 - prob);
        }
      } else {
        st.weight /= (1.0 - prob);
      }
    }
  }

  if (!st.diagonal()) st.weight *= phase_factor(end, st.pair, 0.5 * dt, hbar);
  return ev;
}

namespace {

void histogram_add(DensityField& h, const TrajectoryState& st) {
  const Grid2D& g = h.grid;
  const double fx = (st.phase.r.x - g.x_min) / g.dx();
  const double fy = (st.phase.r.y - g.y_min) / g.dy();
  if (fx < 0.0 || fy < 0.0 || fx >= g.nx || fy >= g.ny) return;
  const std::size_t k = g.index(static_cast<int>(fx), static_cast<int>(fy));
  h.state[st.pair[0]][k] += st.weight.real();
}

struct BlockResult {
  std::vector<double> left;
  std::vector<double> diag;
  std::vector<double> alive;
  std::vector<DensityField> snapshots;
  std::vector<double> snapshot_alive;
  EnsembleStats stats;
  double final_sum = 0.0;
  double final_sum_sq = 0.0;
  double final_count = 0.0;
};

}  // namespace

DensityField density_histogram(std::span<const TrajectoryState> ensemble, const Grid2D& bins) {
  DensityField h(bins, 0.0);
  h.representation = "adiabatic";
  std::size_t alive = 0;
  for (const TrajectoryState& st : ensemble) {
    if (!st.alive) continue;
    ++alive;
    if (st.diagonal()) histogram_add(h, st);
  }
  const double scale = alive > 0 ? 1.0 / (static_cast<double>(alive) * bins.cell_area()) : 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    h.state[0][k] *= scale;
    h.state[1][k] *= scale;
    h.total[k] = h.state[0][k] + h.state[1][k];
  }
  return h;
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("GPDYN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

EnsembleResult run_ensemble(const EnsembleConfig& cfg, const ModelParams& params, const WignerGaussianSpec& spec,
                            const OutputSchedule& schedule) {
  params.validate();
  spec.validate();
  cfg.validate();
  if (schedule.stride < 1) throw ConfigError("output.stride must be >= 1");

  const long n_steps = std::lround(cfg.t_final / cfg.dt);
  const long n_records = n_steps / schedule.stride + 1;
  std::vector<long> snap_steps;
  for (double t : schedule.snapshot_times) {
    if (t < 0.0 || t > cfg.t_final + 1e-12) throw ConfigError("output.snapshots must lie within [0, t_final]");
    snap_steps.push_back(std::lround(t / cfg.dt));
  }

  const StepOptions opts{cfg.dt, cfg.momentum_jump, cfg.hop_cap, cfg.coupling_scale, cfg.coupling_cap};
  constexpr std::size_t kBlock = 256;
  const std::size_t n_blocks = (cfg.n_traj + kBlock - 1) / kBlock;

  auto run_block = [&](std::size_t b) {
    BlockResult res;
    res.left.assign(n_records, 0.0);
    res.diag.assign(n_records, 0.0);
    res.alive.assign(n_records, 0.0);
    for (long s : snap_steps) res.snapshots.emplace_back(cfg.histogram, s * cfg.dt);
    res.snapshot_alive.assign(snap_steps.size(), 0.0);
    const std::size_t first = b * kBlock;
    const std::size_t last = std::min(cfg.n_traj, first + kBlock);
    for (std::size_t j = first; j < last; ++j) {
      TrajectoryRng rng(cfg.seed, j);
      TrajectoryState st = sample_trajectory(params, spec, j, cfg.n_traj, rng);
      for (long step = 0;; ++step) {
        if (step % schedule.stride == 0 && st.alive) {
          const long rec = step / schedule.stride;
          res.alive[rec] += 1.0;
          if (st.diagonal()) {
            const double w = st.weight.real();
            res.diag[rec] += w;
            if (st.phase.r.x < 0.0) res.left[rec] += w;
          }
        }
        for (std::size_t k = 0; k < snap_steps.size(); ++k) {
          if (snap_steps[k] != step || !st.alive) continue;
          res.snapshot_alive[k] += 1.0;
          if (st.diagonal()) histogram_add(res.snapshots[k], st);
        }
        if (step == n_steps) break;
        const Complex before = st.weight;
        const StepEvents ev = trotter_step(st, params, opts, rng);
        res.stats.attempts += ev.attempted;
        res.stats.hops += ev.hopped;
        res.stats.frustrated += ev.frustrated;
        res.stats.frozen += ev.froze;
        if (ev.died) {
          ++res.stats.dead;
          res.stats.dead_weight += std::abs(before);
        }
      }
      if (st.alive) {
        const double w = st.diagonal() ? st.weight.real() : 0.0;
        res.final_sum += w;
        res.final_sum_sq += w * w;
        res.final_count += 1.0;
        res.stats.max_abs_weight = std::max(res.stats.max_abs_weight, std::abs(st.weight));
      }
    }
    return res;
  };

  // Blocks are merged strictly in index order, so the reduction (and hence
  // every output bit) does not depend on the number of workers.
  BlockResult total;
  total.left.assign(n_records, 0.0);
  total.diag.assign(n_records, 0.0);
  total.alive.assign(n_records, 0.0);
  for (long s : snap_steps) total.snapshots.emplace_back(cfg.histogram, s * cfg.dt);
  total.snapshot_alive.assign(snap_steps.size(), 0.0);

  auto merge = [&](const BlockResult& r) {
    for (long k = 0; k < n_records; ++k) {
      total.left[k] += r.left[k];
      total.diag[k] += r.diag[k];
      total.alive[k] += r.alive[k];
    }
    for (std::size_t s = 0; s < total.snapshots.size(); ++s) {
      total.snapshot_alive[s] += r.snapshot_alive[s];
      for (int c = 0; c < 2; ++c) {
        auto& dst = total.snapshots[s].state[c];
        const auto& src = r.snapshots[s].state[c];
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    }
    total.stats.attempts += r.stats.attempts;
    total.stats.hops += r.stats.hops;
    total.stats.frustrated += r.stats.frustrated;
    total.stats.frozen += r.stats.frozen;
    total.stats.dead += r.stats.dead;
    total.stats.dead_weight += r.stats.dead_weight;
    total.stats.max_abs_weight = std::max(total.stats.max_abs_weight, r.stats.max_abs_weight);
    total.final_sum += r.final_sum;
    total.final_sum_sq += r.final_sum_sq;
    total.final_count += r.final_count;
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(cfg.workers > 0 ? cfg.workers : default_worker_count(),
                                      static_cast<unsigned>(n_blocks)));
  std::atomic<std::size_t> next_block{0};
  std::mutex merge_mutex;
  std::map<std::size_t, BlockResult> pending;
  std::size_t next_merge = 0;
  std::exception_ptr failure;

  auto worker = [&]() {
    try {
      for (;;) {
        const std::size_t b = next_block.fetch_add(1);
        if (b >= n_blocks) return;
        BlockResult r = run_block(b);
        std::lock_guard lock(merge_mutex);
        pending.emplace(b, std::move(r));
        while (!pending.empty() && pending.begin()->first == next_merge) {
          merge(pending.begin()->second);
          pending.erase(pending.begin());
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      next_block.store(n_blocks);
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleResult out;
  out.times.resize(n_records);
  out.left_fraction.resize(n_records);
  out.normalization.resize(n_records);
  for (long k = 0; k < n_records; ++k) {
    out.times[k] = static_cast<double>(k * schedule.stride) * cfg.dt;
    const double alive = total.alive[k];
    out.left_fraction[k] = alive > 0 ? total.left[k] / alive : 0.0;
    out.normalization[k] = alive > 0 ? total.diag[k] / alive : 0.0;
  }
  for (std::size_t s = 0; s < total.snapshots.size(); ++s) {
    DensityField& h = total.snapshots[s];
    const double alive = total.snapshot_alive[s];
    const double scale = alive > 0 ? 1.0 / (alive * h.grid.cell_area()) : 0.0;
    for (std::size_t k = 0; k < h.grid.size(); ++k) {
      h.state[0][k] *= scale;
      h.state[1][k] *= scale;
      h.total[k] = h.state[0][k] + h.state[1][k];
    }
    h.representation = "adiabatic";
    out.snapshots.push_back(std::move(h));
  }

  out.stats = total.stats;
  if (total.final_count > 0) {
    out.stats.final_weight_mean = total.final_sum / total.final_count;
    out.stats.final_weight_variance =
        total.final_sum_sq / total.final_count - out.stats.final_weight_mean * out.stats.final_weight_mean;
  }
  if (out.stats.final_weight_variance > cfg.weight_variance_alarm) {
    std::ostringstream msg;
    msg << "ensemble weight variance " << out.stats.final_weight_variance << " exceeds alarm threshold "
        << cfg.weight_variance_alarm;
    out.warnings.push_back(msg.str());
  }
  if (out.stats.dead > 0) {
    std::ostringstream msg;
    msg << out.stats.dead << " trajectories hit the conical intersection and were dropped (total |weight| "
        << out.stats.dead_weight << ")";
    out.warnings.push_back(msg.str());
  }
  return out;
}

}  // namespace gpdyn
