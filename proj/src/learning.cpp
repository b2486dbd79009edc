#include "dgap/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dgap/errors.hpp"
#include "dgap/model.hpp"

namespace dgap {

bool uses_time_variant(Variant v) {
  return v == Variant::kSeTVBRP || v == Variant::kTVBRP;
}

bool uses_selective(Variant v) {
  return v == Variant::kSeTVBRP || v == Variant::kSeBRP;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kSeTVBRP: return "setvbrp";
    case Variant::kTVBRP: return "tvbrp";
    case Variant::kSeBRP: return "sebrp";
    case Variant::kBRP: return "brp";
    case Variant::kBRA: return "bra";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "setvbrp") return Variant::kSeTVBRP;
  if (name == "tvbrp") return Variant::kTVBRP;
  if (name == "sebrp") return Variant::kSeBRP;
  if (name == "brp") return Variant::kBRP;
  if (name == "bra") return Variant::kBRA;
  return std::nullopt;
}

double epsilon_schedule(int t, const ScheduleParams& p) {
  if (static_cast<double>(t) < p.tau * p.t_max) return p.eps_upper;
  const double v = p.eps_upper - (static_cast<double>(t) - p.tau * p.t_max) * p.xi;
  return std::max(v, p.eps_lower);
}

double omega_schedule(int t, const ScheduleParams& p) {
  return std::clamp(static_cast<double>(t) * p.phi_ratio, p.omega_lower, p.omega_upper);
}

int first_floor_iteration(const ScheduleParams& p) {
  if (p.eps_upper <= p.eps_lower) return 1;
  const double estimate = std::ceil(p.tau * p.t_max + (p.eps_upper - p.eps_lower) / p.xi);
  if (estimate > 2e9) return std::numeric_limits<int>::max();
  // walk off the one-ulp wobble of the closed form so the result agrees with
  // the schedule itself
  int t = std::max(1, static_cast<int>(estimate) - 2);
  while (epsilon_schedule(t, p) > p.eps_lower) ++t;
  return t;
}

std::vector<ScheduleIssue> validate_schedules(const ScheduleParams& p) {
  std::vector<ScheduleIssue> issues;
  auto violation = [&](std::string msg) { issues.push_back({false, std::move(msg)}); };
  auto warning = [&](std::string msg) { issues.push_back({true, std::move(msg)}); };

  if (!(p.eps_lower > 0.0) || !(p.eps_upper > 0.0))
    violation("epsilon bounds must be positive");
  if (p.eps_lower > p.eps_upper) violation("eps_lower exceeds eps_upper");
  if (!(p.omega_lower > 0.0)) violation("omega_lower must be positive");
  if (p.omega_lower > p.omega_upper) violation("omega_lower exceeds omega_upper");
  if (p.omega_upper > 1.0) violation("omega_upper exceeds 1");
  if (!(p.xi > 0.0)) violation("xi must be positive");
  if (p.phi_ratio < 0.0) violation("phi_ratio must not be negative");
  if (!issues.empty()) return issues;

  double prev_eps = epsilon_schedule(1, p);
  double prev_omega = omega_schedule(1, p);
  bool omega_reached_upper = prev_omega >= p.omega_upper;
  bool eps_reached_lower = prev_eps <= p.eps_lower;
  for (int t = 1; t <= p.t_max; ++t) {
    const double e = epsilon_schedule(t, p);
    const double w = omega_schedule(t, p);
    if (e > prev_eps) violation("epsilon increases at t=" + std::to_string(t));
    if (w < prev_omega) violation("omega decreases at t=" + std::to_string(t));
    if (e < p.eps_lower || e > p.eps_upper)
      violation("epsilon leaves its bounds at t=" + std::to_string(t));
    if (w < p.omega_lower || w > p.omega_upper)
      violation("omega leaves its bounds at t=" + std::to_string(t));
    omega_reached_upper = omega_reached_upper || w >= p.omega_upper;
    eps_reached_lower = eps_reached_lower || e <= p.eps_lower;
    prev_eps = e;
    prev_omega = w;
    if (!issues.empty()) break;
  }
  if (issues.empty() && !omega_reached_upper && p.omega_lower < p.omega_upper)
    warning("omega never reaches omega_upper within t_max");
  if (issues.empty() && !eps_reached_lower && p.eps_lower < p.eps_upper)
    warning("epsilon never reaches eps_lower within t_max");
  return issues;
}

void validate_config(const LearnerConfig& config) {
  const ScheduleParams& p = config.schedule;
  if (!(p.eps_upper > 0.0) || !(p.eps_lower > 0.0))
    throw ValidationError("config: epsilon bounds must be positive");
  if (p.eps_lower > p.eps_upper) throw ValidationError("config: eps_lower exceeds eps_upper");
  if (!(p.omega_lower > 0.0) || p.omega_lower > p.omega_upper || p.omega_upper > 1.0)
    throw ValidationError("config: omega bounds must satisfy 0 < omega_lower <= omega_upper <= 1");
  if (!(p.xi > 0.0)) throw ValidationError("config: xi must be positive");
  if (p.phi_ratio < 0.0) throw ValidationError("config: phi_ratio must not be negative");
  if (!(p.tau >= 0.0) || p.tau > 1.0) throw ValidationError("config: tau must be in [0, 1]");
  if (p.t_max < 0) throw ValidationError("config: t_max must be >= 0");
  if (!(config.inertia >= 0.0) || config.inertia >= 1.0)
    throw ValidationError("config: inertia must be in [0, 1)");
  if (config.action_cap < 1) throw ValidationError("config: action cap must be >= 1");
}

namespace {

// Dense mirror of the stage plus the game state, built once per run. Service
// sums are rebuilt from scratch in a fixed order whenever the profile
// changes, so a step's outcome depends only on (profile, t, rng state),
// never on float history.
class Engine {
 public:
  Engine(const StageState& stage, std::size_t action_cap) : stage_(&stage) {
    for (const auto& [sat, grids] : stage.visible_grids) sat_ids_.push_back(sat);
    for (const auto& [grid, beta] : stage.beta) {
      grid_index_[grid] = static_cast<int>(grid_ids_.size());
      grid_ids_.push_back(grid);
      beta_.push_back(beta);
    }
    const int n = static_cast<int>(sat_ids_.size());
    const int m = static_cast<int>(grid_ids_.size());
    alpha_.assign(n, std::vector<double>(m, 0.0));
    visible_.assign(n, {});
    eta_.assign(n, 0);
    budget_ = stage.length;
    c_const_ = stage.transition_constant;

    beta_max_ = -std::numeric_limits<double>::infinity();
    for (double b : beta_) beta_max_ = std::max(beta_max_, b);
    alpha_max_ = 0.0;
    int n_max = 0;
    const Minutes per_grid = 1 + c_const_;
    for (int i = 0; i < n; ++i) {
      const SatelliteId sat = sat_ids_[i];
      auto eta_it = stage.eta.find(sat);
      eta_[i] = eta_it == stage.eta.end() ? 0 : eta_it->second;
      const auto& vis = stage.visible_grids.at(sat);
      for (GridId grid : vis) {
        const double alpha = stage.alpha.at({sat, grid});
        alpha_[i][grid_index_.at(grid)] = alpha;
        visible_[i].push_back(grid_index_.at(grid));
        alpha_max_ = std::max(alpha_max_, alpha);
      }
      const Minutes budget = budget_ - eta_[i];
      if (!vis.empty() && budget >= per_grid)
        n_max = std::max(n_max, std::min<int>(budget / per_grid, static_cast<int>(vis.size())));
    }
    n_eff_ = std::max(n_max, 1);

    arena_.resize(n);
    offsets_.resize(n);
    for (int i = 0; i < n; ++i) enumerate_dense(i, action_cap);
    cur_.assign(n, 0);
    service_.assign(m, 0.0);
    exp_y_.assign(m, 0.0);
    pot_term_.assign(m, 0.0);
    pot_stale_.assign(m, false);
    own_buffer_.assign(m, 0.0);
  }

  int satellite_count() const { return static_cast<int>(sat_ids_.size()); }

  std::size_t action_count(int i) const { return offsets_[i].size() - 1; }

  void set_profile(const AllocationFile& a) {
    for (int i = 0; i < satellite_count(); ++i) {
      auto it = a.actions.find(sat_ids_[i]);
      if (it == a.actions.end())
        throw ValidationError("profile is missing satellite " + std::to_string(sat_ids_[i]));
      cur_[i] = index_of_dense(i, it->second);
    }
    recompute_service();
    pot_eps_ = -1.0;  // forces a full term refresh
  }

  AllocationFile profile() const {
    AllocationFile file;
    for (int i = 0; i < satellite_count(); ++i) {
      Action action{sat_ids_[i], {}};
      const auto [it, end] = entries(i, cur_[i]);
      for (const auto* p = it; p != end; ++p) action.allocation[grid_ids_[p->first]] = p->second;
      file.actions[sat_ids_[i]] = std::move(action);
    }
    return file;
  }

  struct Outcome {
    StepRecord record;
    bool better_found{false};  // in the sampled subset
  };

  Outcome step(int t, const LearnerConfig& cfg, RandomSource& rng) {
    const int n = satellite_count();
    const int i = (t - 1) % n;
    const bool bra = cfg.variant == Variant::kBRA;
    const double eps = uses_time_variant(cfg.variant) ? epsilon_schedule(t, cfg.schedule)
                                                      : cfg.schedule.eps_upper;
    const double omega =
        uses_selective(cfg.variant) ? omega_schedule(t, cfg.schedule) : 1.0;
    const double scale = scale_for(eps);
    const std::size_t n_actions = action_count(i);
    std::size_t k =
        static_cast<std::size_t>(std::ceil(omega * static_cast<double>(n_actions)));
    k = std::clamp<std::size_t>(k, 1, n_actions);

    const bool full_set = k == n_actions;
    subset_.clear();
    if (!full_set) {
      // same procedure as sample_action_subset: canonical pool, partial
      // shuffle of whichever side is smaller, incumbent appended
      pool_.clear();
      for (std::size_t idx = 0; idx < n_actions; ++idx)
        if (idx != cur_[i]) pool_.push_back(idx);
      const std::size_t keep = k - 1;
      const std::size_t drop = pool_.size() - keep;
      const std::size_t moves = std::min(keep, drop);
      for (std::size_t d = 0; d < moves; ++d) {
        const std::size_t j = d + static_cast<std::size_t>(rng.below(pool_.size() - d));
        std::swap(pool_[d], pool_[j]);
      }
      if (keep <= drop)
        subset_.assign(pool_.begin(), pool_.begin() + keep);
      else
        subset_.assign(pool_.begin() + drop, pool_.end());
      subset_.push_back(cur_[i]);
    }

    prepare_actor_tables(i, eps);
    const double incumbent = action_utility(i, cur_[i], scale);

    better_.clear();
    if (full_set) {
      for (std::size_t idx = 0; idx < n_actions; ++idx) {
        if (idx == cur_[i]) continue;
        const double u = action_utility(i, idx, scale);
        if (u > incumbent + kBetterReplyTolerance) better_.emplace_back(idx, u);
      }
    } else {
      for (std::size_t idx : subset_) {
        if (idx == cur_[i]) continue;
        const double u = action_utility(i, idx, scale);
        if (u > incumbent + kBetterReplyTolerance) better_.emplace_back(idx, u);
      }
    }

    bool accepted = false;
    if (!better_.empty()) {
      std::size_t trial = better_[0].first;
      if (bra) {
        double best = better_[0].second;
        for (const auto& [idx, u] : better_) {
          if (u > best) {
            best = u;
            trial = idx;
          }
        }
      } else {
        trial = better_[rng.below(better_.size())].first;
      }
      const double theta = bra ? 0.0 : cfg.inertia;
      if (rng.uniform01() < 1.0 - theta) {
        {  // grids touched by either action get stale potential terms
          const auto [it, end] = entries(i, cur_[i]);
          for (const auto* p = it; p != end; ++p) pot_stale_[p->first] = true;
          const auto [it2, end2] = entries(i, trial);
          for (const auto* p = it2; p != end2; ++p) pot_stale_[p->first] = true;
        }
        cur_[i] = trial;
        accepted = true;
        recompute_service();
      }
    }

    last_actor_ = i;
    last_eps_ = eps;
    last_scale_ = scale;
    last_incumbent_utility_ = accepted ? action_utility(i, cur_[i], scale) : incumbent;

    Outcome out;
    out.record.iteration = t;
    out.record.actor = sat_ids_[i];
    out.record.accepted = accepted;
    out.record.objective = objective_now();
    out.record.potential = potential_now(eps, scale);
    out.better_found = !better_.empty();
    return out;
  }

  // Certification sweep helper: does the *full* action set hold a strict
  // better reply for the last actor? Only valid right after a step that did
  // not accept (tables still describe the unchanged profile).
  bool full_better_exists() {
    for (std::size_t idx = 0; idx < action_count(last_actor_); ++idx) {
      if (idx == cur_[last_actor_]) continue;
      if (action_utility(last_actor_, idx, last_scale_) >
          last_incumbent_utility_ + kBetterReplyTolerance)
        return true;
    }
    return false;
  }

  double objective_now() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < beta_.size(); ++j)
      worst = std::max(worst, beta_[j] - service_[j]);
    return worst;
  }


 private:
  double scale_for(double eps) const {
    return n_eff_ * -std::expm1(-static_cast<double>(budget_) * alpha_max_ / eps);
  }

  void enumerate_dense(int i, std::size_t cap) {
    auto& arena = arena_[i];
    auto& offsets = offsets_[i];
    offsets.push_back(0);
    offsets.push_back(0);  // null action
    const auto& vis = visible_[i];
    const Minutes budget = budget_ - eta_[i];
    if (budget <= 0 || vis.empty()) return;
    const Minutes per_grid = 1 + c_const_;
    const int max_support =
        std::min<int>(static_cast<int>(vis.size()), budget / std::max<Minutes>(per_grid, 1));
    std::vector<int> combo;
    std::vector<Minutes> minutes;
    for (int s = 1; s <= max_support; ++s) {
      combo.resize(s);
      minutes.assign(s, 0);
      for (int q = 0; q < s; ++q) combo[q] = q;
      const Minutes spare = budget - s * c_const_;
      for (;;) {
        emit_dense(i, combo, minutes, 0, spare, cap);
        int pos = s - 1;
        while (pos >= 0 && combo[pos] == static_cast<int>(vis.size()) - s + pos) --pos;
        if (pos < 0) break;
        ++combo[pos];
        for (int q = pos + 1; q < s; ++q) combo[q] = combo[q - 1] + 1;
      }
    }
  }

  void emit_dense(int i, const std::vector<int>& combo, std::vector<Minutes>& minutes,
                  std::size_t pos, Minutes spare, std::size_t cap) {
    if (pos == combo.size()) {
      if (action_count(i) >= cap)
        throw CapacityError("action space for satellite " + std::to_string(sat_ids_[i]) +
                            " exceeds the cap of " + std::to_string(cap) +
                            "; use a coarser time granularity or a smaller budget");
      for (std::size_t q = 0; q < combo.size(); ++q)
        arena_[i].emplace_back(visible_[i][combo[q]], minutes[q]);
      offsets_[i].push_back(static_cast<std::uint32_t>(arena_[i].size()));
      return;
    }
    const Minutes slots_after = static_cast<Minutes>(combo.size() - pos - 1);
    for (Minutes x = 1; x + slots_after <= spare; ++x) {
      minutes[pos] = x;
      emit_dense(i, combo, minutes, pos + 1, spare - x, cap);
    }
  }

  std::size_t index_of_dense(int i, const Action& action) const {
    std::vector<std::pair<int, Minutes>> key;
    key.reserve(action.allocation.size());
    for (const auto& [grid, x] : action.allocation) {
      auto it = grid_index_.find(grid);
      if (it == grid_index_.end())
        throw ValidationError("action allocates unknown grid " + std::to_string(grid));
      key.emplace_back(it->second, x);
    }
    for (std::size_t idx = 0; idx < action_count(i); ++idx) {
      const auto [it, end] = entries(i, idx);
      if (static_cast<std::size_t>(end - it) != key.size()) continue;
      if (std::equal(it, end, key.begin())) return idx;
    }
    throw ValidationError("action not found in the action space of satellite " +
                          std::to_string(sat_ids_[i]));
  }

  std::pair<const std::pair<int, Minutes>*, const std::pair<int, Minutes>*> entries(
      int i, std::size_t idx) const {
    const auto* base = arena_[i].data();
    return {base + offsets_[i][idx], base + offsets_[i][idx + 1]};
  }

  // Same accumulation order as the map-based public path: satellites
  // ascending, grids ascending within each action.
  void recompute_service() {
    std::fill(service_.begin(), service_.end(), 0.0);
    for (int i = 0; i < satellite_count(); ++i) {
      const auto [it, end] = entries(i, cur_[i]);
      for (const auto* p = it; p != end; ++p) service_[p->first] += alpha_[i][p->first] * p->second;
    }
  }

  void prepare_actor_tables(int i, double eps) {
    {
      const auto [it, end] = entries(i, cur_[i]);
      for (const auto* p = it; p != end; ++p) own_buffer_[p->first] = alpha_[i][p->first] * p->second;
    }
    for (int j : visible_[i]) {
      const double others = service_[j] - own_buffer_[j];
      exp_y_[j] = std::exp((beta_[j] - others - beta_max_) / eps);
    }
    {
      const auto [it, end] = entries(i, cur_[i]);
      for (const auto* p = it; p != end; ++p) own_buffer_[p->first] = 0.0;
    }
    actor_eps_ = eps;
  }

  // Same arithmetic as LocalUtilityEvaluator::utility, term for term.
  double action_utility(int i, std::size_t idx, double scale) const {
    double sum = 0.0;
    const auto [it, end] = entries(i, idx);
    for (const auto* p = it; p != end; ++p)
      sum += exp_y_[p->first] *
             (1.0 - std::exp(-static_cast<double>(p->second) * alpha_[i][p->first] / actor_eps_));
    return sum / scale;
  }

  // Per-grid exp terms are cached; only grids whose service changed (or an
  // eps change) force new exp calls. The sum itself is always refolded in
  // grid order so the value matches a from-scratch evaluation bit for bit.
  double potential_now(double eps, double scale) {
    if (eps != pot_eps_) {
      pot_eps_ = eps;
      for (std::size_t j = 0; j < beta_.size(); ++j)
        pot_term_[j] = std::exp((beta_[j] - service_[j] - beta_max_) / eps);
      std::fill(pot_stale_.begin(), pot_stale_.end(), false);
    } else {
      for (std::size_t j = 0; j < beta_.size(); ++j) {
        if (pot_stale_[j]) {
          pot_term_[j] = std::exp((beta_[j] - service_[j] - beta_max_) / eps);
          pot_stale_[j] = false;
        }
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < beta_.size(); ++j) sum += pot_term_[j];
    return -sum / scale;
  }

  const StageState* stage_;
  std::vector<SatelliteId> sat_ids_;
  std::vector<GridId> grid_ids_;
  std::map<GridId, int> grid_index_;
  std::vector<double> beta_;
  double beta_max_{}, alpha_max_{};
  int n_eff_{1};
  std::vector<std::vector<double>> alpha_;
  std::vector<Minutes> eta_;
  Minutes budget_{}, c_const_{};
  std::vector<std::vector<std::pair<int, Minutes>>> arena_;  // flattened per satellite
  std::vector<std::vector<std::uint32_t>> offsets_;

  std::vector<std::size_t> cur_;
  std::vector<double> service_, exp_y_;
  std::vector<double> own_buffer_;  // scratch, zeroed after use
  double actor_eps_{1.0};
  std::vector<std::vector<int>> visible_;
  std::vector<std::size_t> subset_, pool_;
  std::vector<std::pair<std::size_t, double>> better_;

  int last_actor_{0};
  double last_eps_{1.0}, last_scale_{1.0}, last_incumbent_utility_{0.0};
  double pot_eps_{-1.0};
  std::vector<double> pot_term_;
  std::vector<bool> pot_stale_;
};

}  // namespace

std::pair<AllocationFile, StepRecord> setvbrp_step(const StageState& stage,
                                                   const AllocationFile& a, int t,
                                                   const LearnerConfig& config,
                                                   RandomSource& rng) {
  validate_config(config);
  if (t < 1) throw ValidationError("setvbrp_step: iteration index must be >= 1");
  if (stage.idle()) throw ValidationError("setvbrp_step: stage has no visible pair");
  validate_allocation(stage, a);
  Engine engine(stage, config.action_cap);
  engine.set_profile(a);
  const Engine::Outcome out = engine.step(t, config, rng);
  return {engine.profile(), out.record};
}

LearnerResult run_learner(const StageState& stage, const LearnerConfig& config,
                          const AllocationFile* initial) {
  validate_config(config);
  AllocationFile start = initial ? *initial : greedy_init(stage);
  validate_allocation(stage, start);

  LearnerResult result;
  result.trace.t_floor =
      uses_time_variant(config.variant) ? first_floor_iteration(config.schedule) : 1;
  if (stage.idle() || config.schedule.t_max == 0) {
    result.final_allocation = std::move(start);
    result.trace.nash_certified = stage.idle();
    return result;
  }

  Engine engine(stage, config.action_cap);
  engine.set_profile(start);
  double best_objective = engine.objective_now();
  RandomSource rng(config.seed);
  const int n = engine.satellite_count();
  int clean_streak = 0;

  for (int t = 1; t <= config.schedule.t_max; ++t) {
    const Engine::Outcome out = engine.step(t, config, rng);
    result.trace.steps.push_back(out.record);
    if (out.record.objective < best_objective) {
      best_objective = out.record.objective;
      result.trace.last_improvement = t;
    }
    if (config.early_stop && t > result.trace.t_floor) {
      if (out.better_found || engine.full_better_exists()) {
        clean_streak = 0;
      } else if (++clean_streak >= n) {
        result.trace.nash_certified = true;
        break;
      }
    }
  }
  result.final_allocation = engine.profile();
  return result;
}

}  // namespace dgap
