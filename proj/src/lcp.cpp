#include "plgrim/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plgrim {

std::vector<MacroAction> macro_candidates(int length) {
  if (length < 1) throw std::invalid_argument("macro_candidates: length must be >= 1");
  std::vector<MacroAction> out;
  for (Cell d : kNeighbors8) out.push_back({std::vector<Cell>(static_cast<std::size_t>(length), d)});
  const int head = (length + 1) / 2;
  for (std::size_t k = 0; k < 4; ++k) {
    const Cell d = kNeighbors4[k];
    const Cell right{-d.y, d.x};
    const Cell left{d.y, -d.x};
    for (Cell turn : {right, left}) {
      MacroAction a;
      for (int i = 0; i < length; ++i) a.moves.push_back(i < head ? d : turn);
      out.push_back(std::move(a));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generative model

LocalModel::LocalModel(const Belief& b, const LocalIRM& irm, const LcpParams& params, double r_sense,
                       std::optional<Cell> theta)
    : params_(params),
      center_(irm.center()),
      radius_(irm.radius()),
      cell_size_(b.cell_size()),
      r_max_(b.risk().r_max()),
      lambda_risk_(b.risk().params().lambda_risk),
      theta_(theta),
      actions_(macro_candidates(params.macro_len)),
      table_(VisibilityTable::get(r_sense / b.cell_size())) {
  const int half = radius_ + static_cast<int>(std::ceil(table_->radius())) + 1;
  auto& t = particle_template_;
  t.origin = center_ - Cell{half, half};
  t.side = 2 * half + 1;
  const auto n = static_cast<std::size_t>(t.side) * t.side;
  t.occupied.assign(n, 1);
  t.covered.assign(n, 0);
  cvar_.assign(n, r_max_);
  blocked_.assign(n, 1);
  viewed_.assign(n, 0);
  for (int y = 0; y < t.side; ++y)
    for (int x = 0; x < t.side; ++x) {
      const Cell c = t.origin + Cell{x, y};
      const auto i = t.local(c);
      // Cells past the window still occlude but earn nothing.
      if (chebyshev(c, center_) > radius_) t.covered[i] = 1;
      if (!b.in_bounds(c)) continue;
      viewed_[i] = b.viewed_from(c) ? 1 : 0;
      switch (b.known(c)) {
        case Knowledge::Occupied:
          break;
        case Knowledge::Free:
          t.occupied[i] = 0;
          if (b.covered(c)) t.covered[i] = 1;
          cvar_[i] = b.risk().cvar(c);
          blocked_[i] = b.risk().traversable(c) ? 0 : 1;
          break;
        case Knowledge::Unknown:
          t.occupied[i] = 0;
          blocked_[i] = 0;
          unknown_.push_back(static_cast<std::uint32_t>(i));
          break;
      }
    }

  // Window positions keep the whole sensor disk inside the extent, so rays
  // can be walked as flat index offsets.
  const auto flat = [&](Cell d) { return d.y * t.side + d.x; };
  for (const auto& ray : table_->rays()) {
    rays_.push_back({flat(ray.offset), static_cast<std::uint32_t>(between_.size()), ray.count});
    for (Cell d : table_->between(ray)) between_.push_back(flat(d));
  }
}

Particle LocalModel::sample_particle(Rng& rng) const {
  Particle p = particle_template_;
  const double q = params_.p_occ;
  if (q <= 0.0 || unknown_.empty()) return p;
  if (q >= 1.0) {
    for (auto i : unknown_) p.occupied[i] = 1;
    return p;
  }
  // Geometric gaps between Occupied draws: the same law as one Bernoulli
  // trial per cell at a fraction of the random numbers.
  const double log_keep = std::log1p(-q);
  const auto n = static_cast<std::int64_t>(unknown_.size());
  for (std::int64_t k = -1;;) {
    k += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-rng.uniform01()) / log_keep));
    if (k >= n) break;
    p.occupied[unknown_[static_cast<std::size_t>(k)]] = 1;
  }
  return p;
}

bool LocalModel::can_move(const Particle& particle, Cell u, Cell v) const {
  if (chebyshev(v, center_) > radius_ || !adjacent8(u, v)) return false;
  if (particle.is_occupied(v)) return false;
  // Moves follow the line-of-sight corner rule, so every cell one move away
  // is one the sensor can see.
  if (u.x != v.x && u.y != v.y && (particle.is_occupied({v.x, u.y}) || particle.is_occupied({u.x, v.y})))
    return false;
  return !blocked_[particle.local(v)] && !blocked_[particle.local(u)];
}

double LocalModel::move_cost(Cell u, Cell v) const {
  const auto& t = particle_template_;
  const double risk = 0.5 * (cvar_[t.local(u)] + cvar_[t.local(v)]);
  return move_length_cells(u, v) * cell_size_ * (1.0 + lambda_risk_ * risk);
}

int LocalModel::sense_into(Particle& p, Cell q) const {
  const auto base = static_cast<std::int32_t>(p.local(q));
  const std::uint8_t* occ = p.occupied.data() + base;
  std::uint8_t* cov = p.covered.data() + base;
  int gained = 0;
  for (const auto& ray : rays_) {
    if (cov[ray.target] | occ[ray.target]) continue;
    bool clear = true;
    for (std::uint32_t k = ray.first; k < ray.first + ray.count; ++k) {
      if (occ[between_[k]]) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    cov[ray.target] = 1;
    ++gained;
  }
  return gained;
}

double LocalModel::shaping(Cell c) const {
  if (!theta_) return 0.0;
  return params_.lambda_goal * euclid_cells(c, *theta_) * cell_size_;
}

LocalModel::Outcome LocalModel::apply(Particle& particle, Cell q, const MacroAction& a) const {
  Outcome out;
  out.end = q;
  for (Cell mv : a.moves) {
    const Cell v = out.end + mv;
    if (!can_move(particle, out.end, v)) break;
    out.cost += move_cost(out.end, v);
    out.end = v;
    ++out.steps;
    // Unknown cells hidden from an old viewpoint stay hidden, whatever the
    // particle says about their occluders.
    if (!viewed_[particle.local(v)]) out.newly_covered += sense_into(particle, v);
  }
  out.reward = params_.lambda_i * out.newly_covered - params_.lambda_c * out.cost - shaping(out.end);
  return out;
}

int LocalModel::reward_bound_cells() const {
  const auto& t = particle_template_;
  int count = 0;
  for (std::size_t i = 0; i < t.occupied.size(); ++i)
    if (!t.occupied[i] && !t.covered[i]) ++count;
  return count;
}

Particle sample_particle(const Belief& b, int radius, double r_sense, double p_occ, Rng& rng) {
  LcpParams params;
  params.p_occ = p_occ;
  const LocalIRM irm = rebuild_local_irm(b, radius);
  return LocalModel(b, irm, params, r_sense, std::nullopt).sample_particle(rng);
}

double rollout_reward(const LocalModel& model, Particle& particle, Cell q, const MacroAction& a) {
  return model.apply(particle, q, a).reward;
}

// ---------------------------------------------------------------------------
// Search

namespace {

/// Flat arena of tree nodes; per-action slots live at node * A + a.
struct Tree {
  int actions = 0;
  std::vector<int> visits;
  std::vector<int> child;
  std::vector<int> n;
  std::vector<double> q;
  std::vector<double> r_sum;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  explicit Tree(int a) : actions(a) { add_node(); }

  int add_node() {
    visits.push_back(0);
    child.insert(child.end(), static_cast<std::size_t>(actions), -1);
    n.insert(n.end(), static_cast<std::size_t>(actions), 0);
    q.insert(q.end(), static_cast<std::size_t>(actions), 0.0);
    r_sum.insert(r_sum.end(), static_cast<std::size_t>(actions), 0.0);
    return static_cast<int>(visits.size()) - 1;
  }
  std::size_t slot(int node, int a) const { return static_cast<std::size_t>(node) * actions + a; }

  /// Greedy (max Q among visited) action at a node, or -1.
  int greedy(int node) const {
    int best = -1;
    for (int a = 0; a < actions; ++a) {
      if (n[slot(node, a)] == 0) continue;
      if (best < 0 || q[slot(node, a)] > q[slot(node, best)]) best = a;
    }
    return best;
  }
};

struct Step {
  int node;
  int action;
  double reward;
};

void legal_actions(const LocalModel& m, const Particle& p, Cell pos, std::vector<int>& out) {
  out.clear();
  const auto acts = m.actions();
  for (int a = 0; a < static_cast<int>(acts.size()); ++a)
    if (m.can_move(p, pos, pos + acts[static_cast<std::size_t>(a)].moves.front())) out.push_back(a);
}

void run_tree(const LocalModel& model, Tree& tree, int budget, Rng& particle_rng, Rng& rollout_rng) {
  const auto& prm = model.params();
  const auto acts = model.actions();
  std::vector<int> legal;
  std::vector<Step> trail;
  for (int sim = 0; sim < budget; ++sim) {
    Particle p = model.sample_particle(particle_rng);
    int node = 0;
    Cell pos = model.center();
    trail.clear();
    double tail = 0.0;
    for (int depth = 0; depth < prm.depth; ++depth) {
      legal_actions(model, p, pos, legal);
      if (legal.empty()) break;
      int chosen = -1;
      for (int a : legal)
        if (tree.n[tree.slot(node, a)] == 0) {
          chosen = a;
          break;
        }
      const bool expand = chosen >= 0;
      if (!expand) {
        const double scale = std::max(tree.hi - tree.lo, 1e-9);
        const double log_n = std::log(static_cast<double>(tree.visits[static_cast<std::size_t>(node)]));
        double best = -std::numeric_limits<double>::infinity();
        for (int a : legal) {
          const auto s = tree.slot(node, a);
          const double ucb = tree.q[s] + prm.ucb_c * scale * std::sqrt(log_n / tree.n[s]);
          if (ucb > best) {
            best = ucb;
            chosen = a;
          }
        }
      }
      const auto out = model.apply(p, pos, acts[static_cast<std::size_t>(chosen)]);
      pos = out.end;
      trail.push_back({node, chosen, out.reward});
      if (expand) {
        if (depth + 1 < prm.depth) tree.child[tree.slot(node, chosen)] = tree.add_node();
        // Uniform random rollout for the remaining depth.
        double disc = 1.0;
        for (int d = depth + 1; d < prm.depth; ++d) {
          legal_actions(model, p, pos, legal);
          if (legal.empty()) break;
          const int a = legal[rollout_rng.below(legal.size())];
          const auto r = model.apply(p, pos, acts[static_cast<std::size_t>(a)]);
          pos = r.end;
          tail += disc * r.reward;
          disc *= prm.gamma;
        }
        break;
      }
      int next = tree.child[tree.slot(node, chosen)];
      if (next < 0 && depth + 1 < prm.depth) {
        next = tree.add_node();
        tree.child[tree.slot(node, chosen)] = next;
      }
      node = next;
    }
    double ret = tail;
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) {
      ret = it->reward + prm.gamma * ret;
      const auto s = tree.slot(it->node, it->action);
      ++tree.visits[static_cast<std::size_t>(it->node)];
      ++tree.n[s];
      tree.q[s] += (ret - tree.q[s]) / tree.n[s];
      tree.r_sum[s] += it->reward;
    }
    if (!trail.empty()) {
      tree.lo = std::min(tree.lo, ret);
      tree.hi = std::max(tree.hi, ret);
    }
  }
}

std::vector<int> greedy_below(const Tree& tree, int root_action, int depth) {
  std::vector<int> seq;
  int node = tree.child[tree.slot(0, root_action)];
  for (int d = 1; d < depth && node >= 0; ++d) {
    const int a = tree.greedy(node);
    if (a < 0) break;
    seq.push_back(a);
    node = tree.child[tree.slot(node, a)];
  }
  return seq;
}

}  // namespace

LocalPolicy pomcp_plan(const LocalModel& model, const PomcpOptions& options) {
  const auto& prm = model.params();
  const int trees = std::max(1, options.trees);
  const int actions = static_cast<int>(model.actions().size());
  std::vector<Tree> forest(static_cast<std::size_t>(trees), Tree(actions));

  const auto grow = [&](int t) {
    const int share = options.budget / trees + (t < options.budget % trees ? 1 : 0);
    Rng particles(derive_seed(options.seed, "particles", {static_cast<std::uint64_t>(t)}));
    Rng rollouts(derive_seed(options.seed, "rollouts", {static_cast<std::uint64_t>(t)}));
    run_tree(model, forest[static_cast<std::size_t>(t)], share, particles, rollouts);
  };
  if (options.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < trees; ++t) grow(t);
  } else {
    for (int t = 0; t < trees; ++t) grow(t);
  }

  LocalPolicy policy;
  policy.simulations = options.budget;
  // Staying put earns nothing but still pays the goal-distance shaping.
  double stay_value = 0.0;
  for (int d = 0; d < prm.depth; ++d) stay_value -= std::pow(prm.gamma, d) * model.shaping(model.center());

  std::vector<double> r_sum(static_cast<std::size_t>(actions), 0.0);
  for (int a = 0; a < actions; ++a) {
    RootStat st{a, 0, 0.0};
    double weighted = 0.0;
    for (const auto& tree : forest) {
      st.visits += tree.n[tree.slot(0, a)];
      weighted += tree.n[tree.slot(0, a)] * tree.q[tree.slot(0, a)];
      r_sum[static_cast<std::size_t>(a)] += tree.r_sum[tree.slot(0, a)];
    }
    if (st.visits == 0) continue;
    st.q = weighted / st.visits;
    policy.root.push_back(st);
  }
  std::stable_sort(policy.root.begin(), policy.root.end(),
                   [](const RootStat& l, const RootStat& r) { return l.q > r.q; });

  for (const auto& st : policy.root) {
    std::size_t best_tree = 0;
    for (std::size_t t = 1; t < forest.size(); ++t)
      if (forest[t].n[forest[t].slot(0, st.action)] > forest[best_tree].n[forest[best_tree].slot(0, st.action)])
        best_tree = t;
    policy.continuation.push_back(greedy_below(forest[best_tree], st.action, prm.depth));
  }

  if (policy.root.empty() || stay_value >= policy.root.front().q) {
    policy.stay = true;
    policy.root_value = stay_value;
    return policy;
  }
  const auto& best = policy.root.front();
  policy.root_value = best.q;
  policy.actions.push_back(best.action);
  policy.reward_trace.push_back(r_sum[static_cast<std::size_t>(best.action)] / best.visits);
  // Deeper trace from the tree that explored the chosen root action most.
  std::size_t best_tree = 0;
  for (std::size_t t = 1; t < forest.size(); ++t)
    if (forest[t].n[forest[t].slot(0, best.action)] > forest[best_tree].n[forest[best_tree].slot(0, best.action)])
      best_tree = t;
  const Tree& tree = forest[best_tree];
  int node = tree.child[tree.slot(0, best.action)];
  for (int d = 1; d < prm.depth && node >= 0; ++d) {
    const int a = tree.greedy(node);
    if (a < 0) break;
    const auto s = tree.slot(node, a);
    policy.actions.push_back(a);
    policy.reward_trace.push_back(tree.r_sum[s] / tree.n[s]);
    node = tree.child[s];
  }
  return policy;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle and commitment

namespace {

double best_value(const LocalModel& m, const Particle& p, Cell pos, int depth_left) {
  if (depth_left == 0) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& a : m.actions()) {
    if (!m.can_move(p, pos, pos + a.moves.front())) continue;
    Particle next = p;
    const auto out = m.apply(next, pos, a);
    best = std::max(best, out.reward + m.params().gamma * best_value(m, next, out.end, depth_left - 1));
    any = true;
  }
  return any ? best : 0.0;
}

}  // namespace

std::vector<std::optional<double>> exhaustive_action_values(const LocalModel& model, int depth) {
  Rng unused(0);
  const Particle p = model.sample_particle(unused);
  std::vector<std::optional<double>> values;
  for (const auto& a : model.actions()) {
    if (!model.can_move(p, model.center(), model.center() + a.moves.front())) {
      values.emplace_back(std::nullopt);
      continue;
    }
    Particle next = p;
    const auto out = model.apply(next, model.center(), a);
    values.emplace_back(out.reward + model.params().gamma * best_value(model, next, out.end, depth - 1));
  }
  return values;
}

std::vector<Cell> committed_prefix(const LocalModel& model, const LocalIRM& irm, std::span<const int> actions) {
  std::vector<Cell> cells;
  Cell pos = model.center();
  for (int a : actions) {
    for (Cell mv : model.actions()[static_cast<std::size_t>(a)].moves) {
      const Cell v = pos + mv;
      if (!irm.edge(pos, v)) return cells;
      cells.push_back(v);
      pos = v;
    }
  }
  return cells;
}

}  // namespace plgrim
