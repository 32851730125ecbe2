#include "mcx/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mcx/barrier.hpp"
#include "mcx/catalog.hpp"
#include "mcx/discs.hpp"
#include "mcx/hyperbolicity.hpp"

namespace mcx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kVersion = "1.0.0";

// Strict reader of one JSON object: typed accessors with defaults, and
// finish() rejects keys that were never read.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_->contains(key) && !j_->at(key).is_null(); }

  const Json& get(const std::string& key) {
    used_.insert(key);
    return j_->at(key);
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    used_.insert(key);
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(at(key), "required number is missing");
    }
    const Json& v = get(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "expected a finite number");
    return x;
  }

  double positive(const std::string& key, std::optional<double> def = std::nullopt) {
    const double x = number(key, def);
    if (!(x > 0.0)) throw ConfigError(at(key), "must be positive");
    return x;
  }

  long long integer(const std::string& key, std::optional<long long> def, long long lo, long long hi) {
    used_.insert(key);
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(at(key), "required integer is missing");
    }
    const Json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
      throw ConfigError(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  bool boolean(const std::string& key, std::optional<bool> def = std::nullopt) {
    used_.insert(key);
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(at(key), "required boolean is missing");
    }
    const Json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> def, const std::vector<std::string>& allowed) {
    used_.insert(key);
    std::string s;
    if (!has(key)) {
      if (!def) throw ConfigError(at(key), "required string is missing");
      s = *def;
    } else {
      const Json& v = get(key);
      if (!v.is_string()) throw ConfigError(at(key), "expected a string");
      s = v.get<std::string>();
    }
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const std::string& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(at(key), "'" + s + "' is not one of: " + list);
    }
    return s;
  }

  static Vec to_vec(const Json& v, const std::string& path, int dim) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    if (v.size() < 1 || v.size() > static_cast<std::size_t>(kMaxDim))
      throw ConfigError(path, "expected 1 to " + std::to_string(kMaxDim) + " numbers");
    if (dim > 0 && v.size() != static_cast<std::size_t>(dim))
      throw ConfigError(path, "expected " + std::to_string(dim) + " numbers");
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path + "/" + std::to_string(i), "expected a number");
      out[static_cast<int>(i)] = v[i].get<double>();
      if (!std::isfinite(out[static_cast<int>(i)]))
        throw ConfigError(path + "/" + std::to_string(i), "expected a finite number");
    }
    return out;
  }

  Vec vec(const std::string& key, int dim, std::optional<Vec> def = std::nullopt) {
    used_.insert(key);
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(at(key), "required array is missing");
    }
    return to_vec(get(key), at(key), dim);
  }

  std::vector<long long> integers(const std::string& key, std::optional<std::vector<long long>> def, long long lo,
                                  long long hi) {
    used_.insert(key);
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(at(key), "required array is missing");
    }
    const Json& v = get(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a nonempty array of integers");
    std::vector<long long> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "/" + std::to_string(i);
      if (!v[i].is_number_integer()) throw ConfigError(p, "expected an integer");
      const long long x = v[i].get<long long>();
      if (x < lo || x > hi) throw ConfigError(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      out.push_back(x);
    }
    return out;
  }

  Section object(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(at(key), "required section is missing");
    return Section(get(key), at(key));
  }

  std::optional<Section> optional_object(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return Section(get(key), at(key));
  }

  std::vector<Section> objects(const std::string& key, bool required) {
    used_.insert(key);
    std::vector<Section> out;
    if (!has(key)) {
      if (required) throw ConfigError(at(key), "required array is missing");
      return out;
    }
    const Json& v = get(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of objects");
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], at(key) + "/" + std::to_string(i));
    return out;
  }

  void skip(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
  }

 private:
  const Json* j_;
  std::string path_;
  std::set<std::string> used_;
};

DomainPtr read_domain(Section& root) {
  Section d = root.object("domain");
  std::vector<std::string> names = catalog_names();
  names.push_back("ball");
  names.push_back("halfspace");
  const std::string name = d.string("name", std::nullopt, names);
  CatalogParams params;
  if (d.has("dim")) params["dim"] = static_cast<double>(d.integer("dim", std::nullopt, 2, kMaxDim));
  for (const char* key : {"radius", "half_width", "scale"})
    if (d.has(key)) params[key] = d.positive(key);
  d.finish();
  try {
    return make_domain(name, params);
  } catch (const PreconditionError& e) {
    throw ConfigError(d.path(), e.what());
  }
}

std::optional<Box> read_region(Section& s, int dim) {
  auto r = s.optional_object("region");
  if (!r) return std::nullopt;
  Box b{r->vec("lo", dim), r->vec("hi", dim)};
  for (int i = 0; i < dim; ++i)
    if (!(b.lo[i] < b.hi[i])) throw ConfigError(r->at("hi"), "must exceed lo in every coordinate");
  r->finish();
  return b;
}

GridSpec read_grid(Section& s, const ImplicitDomain& dom, std::optional<std::vector<long long>> def_counts) {
  const int n = dom.dim();
  GridSpec g;
  g.region = read_region(s, n).value_or(dom.default_region());
  std::vector<long long> counts = s.integers("counts", def_counts, 1, 1000);
  if (counts.size() == 1) counts.assign(static_cast<std::size_t>(n), counts[0]);
  if (counts.size() != static_cast<std::size_t>(n))
    throw ConfigError(s.at("counts"), "expected 1 or " + std::to_string(n) + " counts");
  for (long long c : counts) g.counts.push_back(static_cast<int>(c));
  return g;
}

struct BarrierSetup {
  DomainPtr domain;
  int m = 2;
  std::optional<double> epsilon;
  BarrierOptions options;
};

BarrierSetup read_barrier_setup(Section& root, std::uint64_t seed) {
  BarrierSetup b;
  b.domain = read_domain(root);
  b.m = static_cast<int>(root.integer("m", std::nullopt, 1, b.domain->dim()));
  if (root.has("epsilon")) b.epsilon = root.positive("epsilon");
  root.skip("epsilon");
  b.options.seed = seed;
  if (auto o = root.optional_object("barrier")) {
    if (o->has("alpha")) b.options.alpha = o->positive("alpha");
    o->skip("alpha");
    b.options.safety = o->number("safety", 0.99);
    if (!(b.options.safety > 0.0 && b.options.safety < 1.0)) throw ConfigError(o->at("safety"), "must lie in (0, 1)");
    b.options.cap_degree = static_cast<int>(o->integer("cap_degree", 3, 3, 5));
    if (b.options.cap_degree == 4) throw ConfigError(o->at("cap_degree"), "must be 3 or 5");
    if (o->has("reach")) b.options.reach = o->positive("reach");
    o->skip("reach");
    b.options.convexity_samples = static_cast<int>(o->integer("convexity_samples", 200, 1, 1000000));
    if (auto r = o->optional_object("ratios")) {
      b.options.ratios.eps0 = r->positive("eps0", 0.9);
      b.options.ratios.eps2 = r->positive("eps2", 0.6);
      b.options.ratios.eps1 = r->positive("eps1", 0.3);
      r->finish();
    }
    o->finish();
  }
  return b;
}

BarrierFunction build(const BarrierSetup& s) {
  double eps;
  if (s.epsilon) {
    eps = *s.epsilon;
  } else if (s.options.reach) {
    eps = *s.options.reach;
  } else if (auto d = s.domain->declared_reach(); d && std::isfinite(*d)) {
    eps = *d;
  } else {
    eps = s.domain->length_scale();
  }
  return build_barrier(s.domain, s.m, eps, s.options);
}

CheckRecord record(std::string name, Vec location, double value, double threshold, bool pass) {
  return {std::move(name), std::move(location), value, threshold, pass};
}

using Job = std::function<void(Report&)>;

Job curvature_job(Section& root, std::uint64_t seed) {
  DomainPtr dom = read_domain(root);
  const int samples = static_cast<int>(root.integer("samples", 200, 1, 1000000));
  std::optional<int> m;
  if (root.has("m")) m = static_cast<int>(root.integer("m", std::nullopt, 1, dom->dim()));
  root.skip("m");
  const double tol = root.positive("tolerance", 1e-6);
  const Box region = read_region(root, dom->dim()).value_or(dom->default_region());
  return [=](Report& rep) {
    Rng rng(seed);
    const std::vector<Vec> pts = dom->sample_boundary(region, samples, rng);
    if (pts.empty()) throw PreconditionError("no boundary samples in the region");
    double min_grad = kInf, max_err = 0.0, min_sigma = kInf;
    Vec grad_at, err_at, sigma_at;
    bool analytic = false;
    for (const Vec& p : pts) {
      const double g = dom->gradient(p).norm();
      if (g < min_grad) min_grad = g, grad_at = p;
      const SurfacePoint sp = principal_curvatures(*dom, p);
      if (auto a = dom->analytic_curvatures(p)) {
        analytic = true;
        for (std::size_t j = 0; j < a->size(); ++j) {
          const double e = std::abs((*a)[j] - sp.curvatures[j]);
          if (e > max_err) max_err = e, err_at = p;
        }
      }
      if (m) {
        const double s = m_convexity_defect(sp, *m);
        if (s < min_sigma) min_sigma = s, sigma_at = p;
      }
    }
    rep.records.push_back(record("regular_boundary", grad_at, min_grad, 0.0, min_grad > 0.0));
    if (analytic) rep.records.push_back(record("analytic_curvature_error", err_at, max_err, tol, max_err <= tol));
    if (m) rep.records.push_back(record("m_convexity", sigma_at, min_sigma, -tol, min_sigma >= -tol));
  };
}

Job reach_job(Section& root, std::uint64_t seed, int workers) {
  DomainPtr dom = read_domain(root);
  ReachSettings rs;
  const int samples = static_cast<int>(root.integer("samples", 200, 1, 1000000));
  rs.probe_count = static_cast<int>(root.integer("probes", 48, 1, 1000000));
  rs.probe_length = root.positive("probe_length", 4.0);
  rs.workers = workers;
  const int m = static_cast<int>(root.integer("m", 2, 1, dom->dim()));
  const double declared_tol = root.positive("declared_tolerance", 0.05);
  const Box region = read_region(root, dom->dim()).value_or(dom->default_region());
  return [=](Report& rep) {
    Rng rng(seed);
    const std::vector<Vec> pts = dom->sample_boundary(region, samples, rng);
    const ReachEstimate est = reach_estimate(*dom, pts, rs);
    const Vec& where = est.probe_bound <= est.focal_bound ? est.probe_witness : est.focal_witness;
    rep.records.push_back(record("reach_estimate", where, est.value, 0.0, est.value > 0.0));
    if (auto d = dom->declared_reach(); d && std::isfinite(*d)) {
      const bool ok = std::abs(est.value - *d) <= declared_tol * *d;
      rep.records.push_back(record("reach_vs_declared", where, est.value, *d, ok));
    }
    const CurvatureBoundsReport cb = curvature_bounds_check(*dom, est.value, m, pts);
    auto at = [&](const std::string& which) {
      for (const BoundViolation& v : cb.violations)
        if (v.which == which) return v.point;
      return Vec();
    };
    rep.records.push_back(record("curvature_upper_margin", at("upper"), cb.upper_margin, -cb.tolerance,
                                 cb.upper_margin >= -cb.tolerance));
    rep.records.push_back(record("curvature_lower_margin", at("lower"), cb.lower_margin, -cb.tolerance,
                                 cb.lower_margin >= -cb.tolerance));
    rep.records.push_back(record("negative_part_margin", at("negative-part"), cb.negative_part_margin, -cb.tolerance,
                                 cb.negative_part_margin >= -cb.tolerance));
  };
}

struct VerifySettings {
  GridSpec grid;
  int boundary = 100;
  int levels = 10;
  int level_rays = 8;
  BarrierVerifySpec tolerances;
};

VerifySettings read_verify(Section& root, const ImplicitDomain& dom, bool grid_required) {
  VerifySettings v;
  if (grid_required || root.has("grid")) {
    Section g = root.object("grid");
    v.grid = read_grid(g, dom, std::nullopt);
    g.finish();
  } else {
    root.skip("grid");
    v.grid = GridSpec{dom.default_region(), std::vector<int>(static_cast<std::size_t>(dom.dim()), 11)};
  }
  v.boundary = static_cast<int>(root.integer("boundary_samples", 100, 1, 1000000));
  v.levels = static_cast<int>(root.integer("levels", 10, 1, 1000));
  v.level_rays = static_cast<int>(root.integer("level_rays", 8, 1, 100000));
  if (auto t = root.optional_object("tolerances")) {
    v.tolerances.psh_tol = t->positive("psh", 1e-8);
    v.tolerances.boundary_tol = t->positive("boundary", 1e-8);
    v.tolerances.eigen_tol = t->positive("eigen", 1e-5);
    v.tolerances.level_tol = t->positive("level", 1e-6);
    v.tolerances.gradient_floor = t->positive("gradient_floor", 1e-6);
    t->finish();
  }
  return v;
}

void run_verify(const BarrierFunction& bf, const VerifySettings& vs, std::uint64_t seed, int workers, Report& rep) {
  Rng rng(seed);
  BarrierVerifySpec spec = make_verify_spec(bf, vs.grid, vs.boundary, rng);
  spec.levels = vs.levels;
  spec.level_rays = vs.level_rays;
  spec.psh_tol = vs.tolerances.psh_tol;
  spec.boundary_tol = vs.tolerances.boundary_tol;
  spec.eigen_tol = vs.tolerances.eigen_tol;
  spec.level_tol = vs.tolerances.level_tol;
  spec.gradient_floor = vs.tolerances.gradient_floor;
  spec.workers = workers;
  const BarrierVerifyReport v = verify_barrier(bf, spec);
  for (const CheckRecord& c : v.checks) rep.records.push_back(c);
  rep.records.push_back(record("grid_m_psh_violations", v.grid.worst_point, static_cast<double>(v.grid.violated), 0.0,
                               v.grid.violated == 0));
}

Job barrier_job(Section& root, std::uint64_t seed, int workers, bool verify_only) {
  BarrierSetup setup = read_barrier_setup(root, seed);
  const VerifySettings vs = read_verify(root, *setup.domain, verify_only);
  return [=](Report& rep) {
    const BarrierFunction bf = build(setup);
    if (!verify_only) {
      const TubularCollar& c = bf.collar();
      const ConvexProfile& p = bf.profile();
      const double bound = std::min(0.5 * p.epsilon, profile_radius(p));
      rep.records.push_back(record("collar_radius", Vec(), c.eps0p, bound, c.eps0p < bound));
      const double need = (p.m - 1) / p.epsilon;
      rep.records.push_back(record("profile_convexity", Vec(), p.hddot(-c.eps0p), need, p.hddot(-c.eps0p) > need));
      double min_dd = kInf;
      const Cap& cap = bf.cap();
      for (int i = 0; i <= 1000; ++i) {
        const double t = cap.lo() + (cap.hi() - cap.lo()) * i / 1000.0;
        min_dd = std::min(min_dd, cap.chi_ddot(t));
      }
      rep.records.push_back(record("cap_convexity", Vec(), min_dd, 0.0, min_dd >= 0.0));
    }
    run_verify(bf, vs, seed, workers, rep);
  };
}

Mat read_rotation(Section& s) {
  Mat r = Mat::identity(3);
  if (!s.has("rotation")) {
    s.skip("rotation");
    return r;
  }
  const Json& v = s.get("rotation");
  const std::string path = s.at("rotation");
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected a 3 x 3 array");
  for (int i = 0; i < 3; ++i) {
    const Vec row = Section::to_vec(v[static_cast<std::size_t>(i)], path + "/" + std::to_string(i), 3);
    for (int j = 0; j < 3; ++j) r(i, j) = row[j];
  }
  Mat e = r.transposed() * r;
  e += -1.0 * Mat::identity(3);
  if (e.frobenius() > 1e-10) throw ConfigError(path, "rotation is not orthogonal");
  return r;
}

std::optional<ParameterDomain> read_parameter_domain(Section& s) {
  auto d = s.optional_object("parameters");
  if (!d) return std::nullopt;
  const std::string kind = d->string("kind", std::nullopt, {"disc", "rect", "annulus"});
  ParameterDomain out;
  try {
    if (kind == "disc") {
      out = ParameterDomain::disc(d->positive("radius"));
    } else if (kind == "rect") {
      const Vec x = d->vec("x", 2), y = d->vec("y", 2);
      out = ParameterDomain::rect(x[0], x[1], y[0], y[1]);
    } else {
      out = ParameterDomain::annulus(d->positive("r0"), d->positive("r1"), d->number("theta0", -M_PI),
                                     d->number("theta1", M_PI));
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(d->path(), e.what());
  }
  d->finish();
  return out;
}

std::shared_ptr<const ConformalMap> read_map(Section& s, int n) {
  const std::string kind = s.string("kind", std::nullopt, {"affine", "weierstrass", "helicoid"});
  std::shared_ptr<const ConformalMap> out;
  if (kind == "affine") {
    const Vec c = s.vec("center", n), u = s.vec("u", n), w = s.vec("w", n);
    const double r = s.positive("radius");
    try {
      out = std::make_shared<AffineDisc>(AffineDisc::round(c, u, w, r));
    } catch (const PreconditionError& e) {
      throw ConfigError(s.path(), e.what());
    }
  } else {
    if (n != 3) throw ConfigError(s.at("kind"), "minimal surface patches need a 3-dimensional domain");
    std::shared_ptr<const ConformalMap> base;
    if (kind == "weierstrass") {
      const std::vector<std::string> names = weierstrass_names();
      WeierstrassEntry e = weierstrass_entry(s.string("entry", std::nullopt, names));
      if (auto pd = read_parameter_domain(s)) e.domain = *pd;
      try {
        base = std::make_shared<WeierstrassMap>(e);
      } catch (const PreconditionError& err) {
        throw ConfigError(s.at("parameters"), err.what());
      }
    } else {
      const double a = s.positive("a", 1.0);
      auto pd = read_parameter_domain(s);
      base = pd ? std::make_shared<HelicoidMap>(a, *pd) : std::make_shared<HelicoidMap>(a);
    }
    const double scale = s.positive("scale", 1.0);
    const Vec offset = s.vec("offset", 3, Vec(3));
    out = std::make_shared<SimilarityMap>(base, scale, read_rotation(s), offset);
  }
  s.finish();
  return out;
}

Job subharmonicity_job(Section& root, std::uint64_t seed, int workers) {
  BarrierSetup setup = read_barrier_setup(root, seed);
  std::vector<std::shared_ptr<const ConformalMap>> maps;
  for (Section& s : root.objects("maps", true)) maps.push_back(read_map(s, setup.domain->dim()));
  if (maps.empty()) throw ConfigError(root.at("maps"), "at least one map is required");
  const std::vector<long long> lattice = root.integers("lattice", std::vector<long long>{15, 15}, 1, 10000);
  if (lattice.size() != 2) throw ConfigError(root.at("lattice"), "expected two counts");
  const double tol = root.positive("tolerance", 1e-8);
  const bool control = root.boolean("negative_control", true);
  return [=](Report& rep) {
    const BarrierFunction bf = build(setup);
    CompositionOptions opts;
    const DomainPtr dom = setup.domain;
    opts.inside = [dom](const Vec& x) { return dom->value(x) <= 0.0; };
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const ConformalMap& f = *maps[i];
      const auto samples = f.domain().lattice(static_cast<int>(lattice[0]), static_cast<int>(lattice[1]));
      const SubharmonicityReport r = subharmonicity_sweep(bf, f, samples, tol, opts, workers);
      rep.records.push_back(record("subharmonic/" + std::to_string(i) + "/" + f.name(), r.argmin_point,
                                   r.min_laplacian, -tol, r.pass()));
    }
    if (control) {
      const int n = dom->dim();
      const LambdaField neg(
          n, [](const Vec& x) { return -x.norm2(); }, [](const Vec& x) { return -2.0 * x; },
          [n](const Vec&) { return -2.0 * SymMatrix::identity(n); });
      const ConformalMap& f = *maps.front();
      const SubharmonicityReport r = subharmonicity_sweep(neg, f, f.domain().lattice(5, 5), tol, {}, workers);
      rep.records.push_back(record("negative_control_flagged", r.argmin_point, r.min_laplacian, -tol, !r.pass()));
    }
  };
}

Job metric_job(Section& root, std::uint64_t seed, int workers) {
  DomainPtr dom = read_domain(root);
  const int n = dom->dim();
  std::vector<std::pair<Vec, Vec>> pairs;
  for (Section& s : root.objects("pairs", false)) {
    pairs.emplace_back(s.vec("p", n), s.vec("v", n));
    s.finish();
  }
  int random_count = 0;
  double max_norm = 0.9;
  if (auto r = root.optional_object("random_pairs")) {
    random_count = static_cast<int>(r->integer("count", std::nullopt, 0, 1000000));
    max_norm = r->positive("max_norm", 0.9);
    r->finish();
  }
  if (pairs.empty() && random_count == 0) throw ConfigError(root.at("pairs"), "no (p, v) pairs requested");
  DiscSearchSpec spec;
  spec.workers = workers;
  if (auto s = root.optional_object("search")) {
    spec.orientations = static_cast<int>(s->integer("orientations", spec.orientations, 1, 1000));
    spec.offset_grid = static_cast<int>(s->integer("offset_grid", spec.offset_grid, 2, 1000));
    spec.offset_rounds = static_cast<int>(s->integer("offset_rounds", spec.offset_rounds, 0, 100));
    spec.golden_iterations = static_cast<int>(s->integer("golden_iterations", spec.golden_iterations, 1, 200));
    spec.rays = static_cast<int>(s->integer("rays", spec.rays, 4, 100000));
    spec.max_radius = s->positive("max_radius", spec.max_radius);
    spec.margin = s->positive("margin", spec.margin);
    s->finish();
  }
  const double gap = root.positive("relative_gap", 0.01);
  return [=](Report& rep) {
    std::vector<std::pair<Vec, Vec>> all = pairs;
    Rng rng(seed);
    for (int i = 0; i < random_count;) {
      const Vec p = rng.unit_vec(n) * (max_norm * std::pow(rng.uniform(), 1.0 / n));
      const Vec v = rng.unit_vec(n);
      if (!(dom->value(p) < 0.0)) continue;
      all.emplace_back(p, v);
      ++i;
    }
    const bool ball = dom->name() == "sphere";
    const double radius = ball ? *dom->declared_reach() : 1.0;
    for (const auto& [p, v] : all) {
      const MetricEstimate e = metric_upper_bound(*dom, p, v, spec);
      Vec loc(std::min(2 * n, kMaxDim));
      for (int i = 0; i < loc.size(); ++i) loc[i] = i < n ? p[i] : v[i - n];
      if (ball) {
        const double oracle = bck_metric(p / radius, v / radius);
        const bool ok = e.found && e.bound >= oracle - 1e-6 && e.bound <= (1.0 + gap) * oracle;
        rep.records.push_back(record("metric_upper_bound", loc, e.bound, oracle, ok));
      } else {
        rep.records.push_back(record("metric_upper_bound", loc, e.bound, kInf, e.found));
      }
    }
  };
}

Job omega_d_job(Section& root) {
  Section s = root.object("slice");
  const std::string kind = s.string("kind", std::nullopt, {"punctured-plane", "disc", "strip"});
  std::function<bool(double, double)> slice;
  std::vector<std::pair<double, double>> omitted;
  if (kind == "punctured-plane") {
    if (s.has("points")) {
      const Json& pts = s.get("points");
      if (!pts.is_array()) throw ConfigError(s.at("points"), "expected an array of points");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec q = Section::to_vec(pts[i], s.at("points") + "/" + std::to_string(i), 2);
        omitted.emplace_back(q[0], q[1]);
      }
    }
    s.skip("points");
    slice = [omitted](double x, double y) {
      return std::none_of(omitted.begin(), omitted.end(), [&](const auto& q) { return x == q.first && y == q.second; });
    };
  } else if (kind == "disc") {
    const double r = s.positive("radius");
    const Vec c = s.vec("center", 2, Vec(2));
    slice = [r, c](double x, double y) { return std::hypot(x - c[0], y - c[1]) < r; };
  } else {
    const double w = s.positive("half_width");
    slice = [w](double, double y) { return std::abs(y) < w; };
  }
  s.finish();
  const Vec p = root.vec("p", 3), q = root.vec("q", 3);
  const std::vector<long long> ks = root.integers("ks", std::vector<long long>{10, 100, 1000, 10000}, 2, 1000000000);
  const double eta = root.positive("eta", 0.01);
  ChainSpec spec;
  spec.vertical_radius = root.positive("vertical_radius", 0.5);
  return [=](Report& rep) {
    const OmegaD dom(slice, kind, omitted);
    double prev = kInf, last = kInf;
    for (long long k : ks) {
      const ChainBound b = omega_d_distance_chain(dom, p, q, static_cast<int>(k), spec);
      const Vec loc{p[0], p[1], p[2], q[0], q[1], q[2], static_cast<double>(k)};
      rep.records.push_back(record("distance_chain", loc, b.total, prev, b.total <= prev));
      prev = last = b.total;
    }
    const Vec loc{p[0], p[1], p[2], q[0], q[1], q[2]};
    rep.records.push_back(record("chain_below_eta", loc, last, eta, last < eta));
  };
}

Job convex_job(Section& root, std::uint64_t seed) {
  const Vec interior = root.vec("interior", -1);
  const int n = interior.size();
  HalfspaceIntersection h;
  for (Section& s : root.objects("halfspaces", false)) {
    h.functionals.push_back(s.vec("normal", n));
    h.bounds.push_back(s.number("bound"));
    s.finish();
  }
  const int trials = static_cast<int>(root.integer("trials", 10000, 0, 100000000));
  const double radius = root.positive("trial_radius", 1e6);
  std::optional<bool> expect;
  if (root.has("expect_2plane")) expect = root.boolean("expect_2plane");
  root.skip("expect_2plane");
  return [=](Report& rep) {
    Rng rng(seed);
    const ConvexClassification c = convex_contains_2plane(h, interior, rng, trials, radius);
    const double found = c.contains_2plane ? 1.0 : 0.0;
    rep.records.push_back(record("rank_certificate", interior, c.rank, n - 2, (c.rank <= n - 2) == c.contains_2plane));
    rep.records.push_back(record("contains_2plane", interior, found, expect ? (*expect ? 1.0 : 0.0) : kNaN,
                                 !expect || *expect == c.contains_2plane));
    rep.records.push_back(record("random_planes_exit", interior, static_cast<double>(c.trials_exited),
                                 static_cast<double>(c.trials), c.contains_2plane || c.trials_exited == c.trials));
  };
}

std::string format_number(double x, bool json) {
  if (std::isnan(x)) return json ? "\"nan\"" : "nan";
  if (std::isinf(x)) return x > 0 ? (json ? "\"inf\"" : "inf") : (json ? "\"-inf\"" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_json(std::ostringstream& os, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << Json(it.key()).dump() << ':';
        write_json(os, it.value());
      }
      os << '}';
      break;
    }
    case Json::value_t::array: {
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',';
        write_json(os, j[i]);
      }
      os << ']';
      break;
    }
    case Json::value_t::number_float:
      os << format_number(j.get<double>(), true);
      break;
    default:
      os << j.dump();
  }
}

void write_vec(std::ostringstream& os, const Vec& v) {
  os << '[';
  for (int i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_number(v[i], true);
  os << ']';
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

const char* to_string(Analysis a) noexcept {
  switch (a) {
    case Analysis::curvature: return "curvature";
    case Analysis::reach: return "reach";
    case Analysis::barrier: return "barrier";
    case Analysis::verify: return "verify";
    case Analysis::subharmonicity: return "subharmonicity";
    case Analysis::metric: return "metric";
    case Analysis::omega_d: return "omega-d";
    case Analysis::convex_classify: return "convex-classify";
  }
  return "unknown";
}

std::vector<std::string> analysis_names() {
  return {"curvature", "reach", "barrier", "verify", "subharmonicity", "metric", "omega-d", "convex-classify"};
}

Analysis parse_analysis(const std::string& name) {
  for (Analysis a : {Analysis::curvature, Analysis::reach, Analysis::barrier, Analysis::verify,
                     Analysis::subharmonicity, Analysis::metric, Analysis::omega_d, Analysis::convex_classify})
    if (name == to_string(a)) return a;
  throw ConfigError("/analysis", "unknown analysis '" + name + "'");
}

Json parse_config(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

void apply_env_overrides(Json& config, const std::vector<std::string>& environment) {
  const std::string prefix = "MCX_";
  for (const std::string& entry : environment) {
    if (entry.rfind(prefix, 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    const std::string value = entry.substr(eq + 1);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    std::vector<std::string> parts;
    for (std::size_t pos = 0;;) {
      const std::size_t next = key.find("__", pos);
      parts.push_back(key.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    Json* node = &config;
    std::string path;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      path += "/" + parts[i];
      if (parts[i].empty()) throw ConfigError(path, "empty key in environment override " + entry.substr(0, eq));
      if (!node->is_object()) throw ConfigError(path, "environment override descends into a non-object");
      if (i + 1 < parts.size()) {
        if (!node->contains(parts[i])) (*node)[parts[i]] = Json::object();
        node = &(*node)[parts[i]];
      } else {
        Json parsed = Json::parse(value, nullptr, false);
        (*node)[parts[i]] = parsed.is_discarded() ? Json(value) : parsed;
      }
    }
  }
}

Report run_analysis(Analysis analysis, const Json& config, int workers) {
  Section root(config, "");
  Report rep;
  rep.analysis = analysis;
  if (root.has("analysis")) {
    const std::string declared = root.string("analysis", std::nullopt, analysis_names());
    if (declared != to_string(analysis))
      throw ConfigError("/analysis", "config is for '" + declared + "', not '" + to_string(analysis) + "'");
  }
  root.skip("analysis");
  rep.seed = static_cast<std::uint64_t>(root.integer("seed", 1, 0, std::numeric_limits<long long>::max()));
  root.skip("workers");
  workers = std::max(1, workers);

  Job job;
  switch (analysis) {
    case Analysis::curvature: job = curvature_job(root, rep.seed); break;
    case Analysis::reach: job = reach_job(root, rep.seed, workers); break;
    case Analysis::barrier: job = barrier_job(root, rep.seed, workers, false); break;
    case Analysis::verify: job = barrier_job(root, rep.seed, workers, true); break;
    case Analysis::subharmonicity: job = subharmonicity_job(root, rep.seed, workers); break;
    case Analysis::metric: job = metric_job(root, rep.seed, workers); break;
    case Analysis::omega_d: job = omega_d_job(root); break;
    case Analysis::convex_classify: job = convex_job(root, rep.seed); break;
  }
  root.finish();

  rep.config = Json::object();
  for (auto it = config.begin(); it != config.end(); ++it)
    if (it.key() != "workers") rep.config[it.key()] = it.value();
  rep.config["seed"] = rep.seed;

  try {
    job(rep);
  } catch (const PreconditionError& e) {
    rep.records.push_back(record("precondition", Vec::from(std::span<const double>(e.locator().data(), std::min<std::size_t>(e.locator().size(), kMaxDim))), kNaN, kNaN, false));
    rep.error = e.what();
  } catch (const Error& e) {
    rep.records.push_back(record("pipeline", Vec::from(std::span<const double>(e.locator().data(), std::min<std::size_t>(e.locator().size(), kMaxDim))), kNaN, kNaN, false));
    rep.error = e.what();
  } catch (const std::exception& e) {
    rep.records.push_back(record("pipeline", Vec(), kNaN, kNaN, false));
    rep.error = e.what();
  }
  return rep;
}

std::string emit(const Report& report, ReportFormat format) {
  std::ostringstream os;
  std::size_t failed = 0;
  for (const CheckRecord& r : report.records) failed += r.pass ? 0 : 1;
  if (format == ReportFormat::json_lines) {
    Json header = Json::object();
    header["tool"] = "mcx";
    header["version"] = kVersion;
    header["analysis"] = to_string(report.analysis);
    header["seed"] = report.seed;
    header["config"] = report.config;
    write_json(os, Json{{"header", header}});
    os << '\n';
    for (const CheckRecord& r : report.records) {
      os << "{\"name\":" << Json(r.name).dump() << ",\"location\":";
      write_vec(os, r.location);
      os << ",\"value\":" << format_number(r.value, true) << ",\"threshold\":" << format_number(r.threshold, true)
         << ",\"pass\":" << (r.pass ? "true" : "false") << "}\n";
    }
    Json summary = Json::object();
    summary["analysis"] = to_string(report.analysis);
    summary["checks"] = report.records.size();
    summary["failed"] = failed;
    summary["pass"] = report.pass();
    if (!report.error.empty()) summary["error"] = report.error;
    write_json(os, Json{{"summary", summary}});
    os << '\n';
  } else {
    os << "name,location,value,threshold,pass\n";
    for (const CheckRecord& r : report.records) {
      std::string loc;
      for (int i = 0; i < r.location.size(); ++i) loc += (i ? ";" : "") + format_number(r.location[i], false);
      os << csv_field(r.name) << ',' << loc << ',' << format_number(r.value, false) << ','
         << format_number(r.threshold, false) << ',' << (r.pass ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed to write " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename " + tmp + " to " + path);
  }
}

int cli_main(int argc, const char* const* argv, const std::vector<std::string>& environment) {
  CLI::App app{"Barrier functions, minimal discs and hyperbolicity checks for domains in R^n", "mcx"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path, out_path, format = "json-lines";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--seed", seed, "overrides the configured seed");
  app.add_option("--out", out_path, "report path (stdout when absent)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json-lines", "csv-summary"}));
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  for (const std::string& name : analysis_names()) app.add_subcommand(name, "run the " + name + " analysis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Analysis analysis = parse_analysis(app.get_subcommands().front()->get_name());
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    Json config = parse_config(buf.str());
    if (!config.is_object()) throw ConfigError("", "the configuration must be a JSON object");
    apply_env_overrides(config, environment);
    if (seed) config["seed"] = *seed;
    int nworkers = 1;
    if (workers) {
      nworkers = *workers;
    } else if (config.contains("workers")) {
      Section root(config, "");
      nworkers = static_cast<int>(root.integer("workers", 1, 1, 4096));
    }
    const Report report = run_analysis(analysis, config, nworkers);
    const std::string bytes =
        emit(report, format == "csv-summary" ? ReportFormat::csv_summary : ReportFormat::json_lines);
    if (out_path.empty()) {
      std::cout << bytes << std::flush;
    } else {
      write_atomic(out_path, bytes);
    }
    if (!report.error.empty()) std::cerr << "mcx: " << report.error << '\n';
    return report.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "mcx: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mcx: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mcx
