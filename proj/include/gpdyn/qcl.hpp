#pragma once

// Trajectory-ensemble solver for the quantum-classical Liouville equation in
// the adiabatic basis.
//
// Each trajectory carries a phase-space point, an ordered pair s = (a, a') of
// adiabatic column indices and a complex Monte Carlo weight. One Trotter step:
//
//   1. weight *= exp(-i dt/2 (W_a - W_a') / hbar)
//   2. velocity Verlet on the mean surface (W_a + W_a') / 2
//   3. stochastic single-index transition: Delta = |P/M . d1| dt,
//      hop probability Delta / (1 + Delta), importance weights 1/pi and
//      1/(1 - pi); with momentum jumps enabled the momentum component along
//      d1 is rescaled to conserve P^2/2M + (W_a + W_a')/2
//   4. weight *= exp(-i dt/2 (W_a - W_a') / hbar) at the new point
//
// WA-QCL is the full scheme; AW-QCL is the same scheme with the momentum jump
// switched off, which drops the momentum-derivative term of the generator.
//
// For the two-state model every matrix element of the generator is a
// single-valued function of position, so no extra sign bookkeeping is needed
// for coherences.

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gpdyn/grid.hpp"
#include "gpdyn/lvc_model.hpp"

namespace gpdyn {

struct PhasePoint {
  Vec2 r;
  Vec2 p;
};

struct TrajectoryState {
  PhasePoint phase;
  std::array<int, 2> pair{kLowerColumn, kLowerColumn};
  Complex weight{1.0, 0.0};
  int hops = 0;
  bool alive = true;
  bool transitions_enabled = true;

  bool diagonal() const { return pair[0] == pair[1]; }
};

// Gaussian packet in Wigner form; same width convention as PacketSpec:
// position std sigma/2 and momentum std hbar/sigma per axis.
struct WignerGaussianSpec {
  Vec2 center_r{-0.5, 0.0};
  Vec2 center_p{2.5, 0.0};
  double sigma = 1.0;
  int diabatic_state = 0;  // 0 -> |1>, 1 -> |2>

  void validate() const;
};

struct EnsembleConfig {
  std::size_t n_traj = 100000;
  double dt = 0.002;
  double t_final = 3.0;
  bool momentum_jump = true;  // true: WA-QCL, false: AW-QCL
  int hop_cap = 8;
  std::uint64_t seed = 20140611;
  double coupling_scale = 1.0;  // multiplies d1; 0 injects d1 == 0
  double coupling_cap = 1e6;    // |d1| beyond this marks the trajectory dead
  double weight_variance_alarm = 1e4;
  unsigned workers = 0;  // 0: GPDYN_WORKERS or hardware concurrency
  Grid2D histogram{64, 64, -8.0, 8.0, -8.0, 8.0};

  void validate() const;
};

// Deterministic per-trajectory random stream derived from (seed, index).
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t index);

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Draws trajectory `index` of an ensemble of n_traj. Even indices carry
// diagonal pairs, odd indices coherences; pair choice within each stratum
// follows the initial adiabatic density at the sampled point and weights are
// set so that the estimator is unbiased and sum of diagonal weights / N = 1.
TrajectoryState sample_trajectory(const ModelParams& params, const WignerGaussianSpec& spec, std::size_t index,
                                  std::size_t n_traj, TrajectoryRng& rng);

std::vector<TrajectoryState> sample_initial_ensemble(const ModelParams& params, const WignerGaussianSpec& spec,
                                                     const EnsembleConfig& cfg);

struct StepOptions {
  double dt = 0.002;
  bool momentum_jump = true;
  int hop_cap = 8;
  double coupling_scale = 1.0;
  double coupling_cap = 1e6;
};

struct StepEvents {
  bool attempted = false;
  bool hopped = false;
  bool frustrated = false;
  bool froze = false;
  bool died = false;
};

StepEvents trotter_step(TrajectoryState& state, const ModelParams& params, const StepOptions& opts,
                        TrajectoryRng& rng);

// Energy-conserving momentum adjustment along d1 for a change of one pair
// index from surface energy w_old to w_new (energy P^2/2M + (W_a + W_a')/2).
// Returns false for a frustrated jump, leaving p untouched.
bool momentum_jump(Vec2& p, Vec2 d1, double w_old, double w_new, double mass);

// Energy carried by a trajectory: P^2/2M + (W_a + W_a')/2.
double trajectory_energy(const TrajectoryState& state, const ModelParams& params);

struct OutputSchedule {
  int stride = 5;                    // steps between time-series samples
  std::vector<double> snapshot_times;  // histogram times
};

struct EnsembleStats {
  std::uint64_t attempts = 0;
  std::uint64_t hops = 0;
  std::uint64_t frustrated = 0;
  std::uint64_t frozen = 0;
  std::uint64_t dead = 0;
  double dead_weight = 0.0;  // sum |weight| of trajectories lost to the CI
  double final_weight_mean = 0.0;
  double final_weight_variance = 0.0;
  double max_abs_weight = 0.0;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<double> left_fraction;
  std::vector<double> normalization;  // sum of diagonal Re(weight) / N_alive
  std::vector<DensityField> snapshots;
  EnsembleStats stats;
  std::vector<std::string> warnings;
};

EnsembleResult run_ensemble(const EnsembleConfig& cfg, const ModelParams& params, const WignerGaussianSpec& spec,
                            const OutputSchedule& schedule);

// Weighted position histogram of diagonal-pair trajectories (real part of the
// weight), per surface and total, normalised by the number of live
// trajectories and the bin area.
DensityField density_histogram(std::span<const TrajectoryState> ensemble, const Grid2D& bins);

// Worker count from the environment (GPDYN_WORKERS) or the hardware.
unsigned default_worker_count();

}  // namespace gpdyn
