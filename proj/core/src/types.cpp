#include "vpdecay/types.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace vpdecay {

void validate_species(std::span<const Species> species) {
  if (species.empty()) throw std::invalid_argument("at least one species is required");
  for (const auto& s : species) {
    if (!(s.mass > 0.0)) {
      throw std::invalid_argument("species " + std::to_string(s.id) + ": mass must be > 0");
    }
  }
}

std::vector<Species> neutral_pair() { return {Species{0, 1.0, 1.0}, Species{1, -1.0, 1.0}}; }

SpeciesParticles::SpeciesParticles(Species species, std::vector<Vec3> positions,
                                   std::vector<Vec3> velocities, std::vector<double> weights)
    : SpeciesParticles(species, std::move(positions), std::move(velocities),
                       std::make_shared<const std::vector<double>>(std::move(weights))) {}

SpeciesParticles::SpeciesParticles(Species species, std::vector<Vec3> positions,
                                   std::vector<Vec3> velocities,
                                   std::shared_ptr<const std::vector<double>> weights)
    : species_(species),
      positions_(std::move(positions)),
      velocities_(std::move(velocities)),
      weights_(std::move(weights)) {
  if (!weights_) throw std::invalid_argument("SpeciesParticles: null weights");
  if (positions_.size() != velocities_.size() || positions_.size() != weights_->size()) {
    throw std::invalid_argument("SpeciesParticles: array lengths differ");
  }
  for (double w : *weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("SpeciesParticles: negative or NaN weight");
  }
}

double SpeciesParticles::number() const {
  double s = 0.0;
  for (double w : *weights_) s += w;
  return s;
}

std::size_t particle_count(const ParticleEnsemble& e) {
  std::size_t n = 0;
  for (const auto& s : e) n += s.size();
  return n;
}

double total_charge(const ParticleEnsemble& e) {
  double q = 0.0;
  for (const auto& s : e) q += s.species().charge * s.number();
  return q;
}

Vec3 total_momentum(const ParticleEnsemble& e) {
  Vec3 p{0.0, 0.0, 0.0};
  for (const auto& s : e) {
    Vec3 ps{0.0, 0.0, 0.0};
    const auto w = s.weights();
    const auto v = s.velocities();
    for (std::size_t j = 0; j < s.size(); ++j) ps += w[j] * v[j];
    p += s.species().mass * ps;
  }
  return p;
}

double momentum_scale(const ParticleEnsemble& e) {
  double total = 0.0;
  for (const auto& s : e) {
    double ps = 0.0;
    const auto w = s.weights();
    const auto v = s.velocities();
    for (std::size_t j = 0; j < s.size(); ++j) ps += w[j] * norm(v[j]);
    total += s.species().mass * ps;
  }
  return total;
}

Snapshot Snapshot::from_g_frame(double t, ParticleEnsemble ensemble) {
  Snapshot s;
  s.t_ = t;
  s.physical_.reserve(ensemble.size());
  for (const auto& sp : ensemble) {
    std::vector<Vec3> x(sp.size());
    const auto X = sp.positions();
    const auto V = sp.velocities();
    for (std::size_t j = 0; j < sp.size(); ++j) {
      for (int a = 0; a < 3; ++a) x[j][a] = X[j][a] + V[j][a] * t;
    }
    s.physical_.push_back(std::move(x));
  }
  s.ensemble_ = std::move(ensemble);
  return s;
}

Snapshot Snapshot::from_physical(double t, const ParticleEnsemble& physical) {
  ParticleEnsemble g;
  g.reserve(physical.size());
  for (const auto& sp : physical) {
    std::vector<Vec3> X(sp.size());
    const auto x = sp.positions();
    const auto V = sp.velocities();
    for (std::size_t j = 0; j < sp.size(); ++j) {
      for (int a = 0; a < 3; ++a) X[j][a] = x[j][a] - V[j][a] * t;
    }
    g.emplace_back(sp.species(), std::move(X), std::vector<Vec3>(V.begin(), V.end()),
                   sp.shared_weights());
  }
  return from_g_frame(t, std::move(g));
}

Grid3 Grid3::cube(double lo, double hi, int n) {
  Grid3 g;
  for (auto& a : g.axes) a = Axis{lo, hi, n};
  return g;
}

Grid3 Grid3::box(const Vec3& lo, const Vec3& hi, int n) {
  Grid3 g;
  for (int a = 0; a < 3; ++a) g.axes[a] = Axis{lo[a], hi[a], n};
  return g;
}

Vec3 Grid3::node(std::size_t flat) const {
  const std::size_t nk = axes[2].n;
  const std::size_t nj = axes[1].n;
  const int k = static_cast<int>(flat % nk);
  const int j = static_cast<int>((flat / nk) % nj);
  const int i = static_cast<int>(flat / (nk * nj));
  return node(i, j, k);
}

void Grid3::validate() const {
  for (const auto& a : axes) {
    if (a.n < 2 || !(a.lo < a.hi)) throw std::invalid_argument("grid axis needs n >= 2 and lo < hi");
  }
}

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(g_threads, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, &errors, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

namespace {
std::mutex g_warn_mu;
WarningHandler g_warn = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mu);
  g_warn = handler ? std::move(handler) : [](const std::string&) {};
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mu);
  g_warn(message);
}

}  // namespace vpdecay
