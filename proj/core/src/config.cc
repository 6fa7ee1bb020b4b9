// Copyright 2026 The teamsolve Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "teamsolve/config.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "teamsolve/measures.h"

namespace teamsolve {
namespace {

constexpr char kModule[] = "cli_io";
using nlohmann::json;

[[noreturn]] void Fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kConfig, kModule, (path.empty() ? "/" : path) + ": " + msg);
}

// A JSON value together with its pointer, so every error can name its field.
class Node {
 public:
  Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {}

  const json& value() const { return v_; }
  const std::string& path() const { return path_; }

  bool Has(const std::string& key) const { return v_.is_object() && v_.contains(key); }
  Node operator[](const std::string& key) const {
    if (!v_.is_object()) Fail(path_, "expected an object");
    if (!v_.contains(key)) Fail(path_ + "/" + key, "missing required field");
    return Node(v_.at(key), path_ + "/" + key);
  }
  Node operator[](size_t k) const { return Node(v_.at(k), path_ + "/" + std::to_string(k)); }

  size_t ArraySize() const {
    if (!v_.is_array()) Fail(path_, "expected an array");
    return v_.size();
  }
  double Double() const {
    if (!v_.is_number()) Fail(path_, "expected a number");
    return v_.get<double>();
  }
  double Positive() const {
    double x = Double();
    if (!(x > 0.0)) Fail(path_, "must be positive");
    return x;
  }
  long Integer(long lo) const {
    if (!v_.is_number_integer()) Fail(path_, "expected an integer");
    long x = v_.get<long>();
    if (x < lo) Fail(path_, "must be at least " + std::to_string(lo));
    return x;
  }
  std::string String() const {
    if (!v_.is_string()) Fail(path_, "expected a string");
    return v_.get<std::string>();
  }
  Point PointValue(int dim = -1) const {
    size_t n = ArraySize();
    if (n == 0 || n > static_cast<size_t>(kMaxDim)) Fail(path_, "expected 1 to 8 coordinates");
    if (dim >= 0 && static_cast<int>(n) != dim) {
      Fail(path_, "expected " + std::to_string(dim) + " coordinates");
    }
    Point p(n);
    for (size_t k = 0; k < n; ++k) p[k] = (*this)[k].Double();
    return p;
  }
  std::vector<Point> Points(int dim = -1) const {
    std::vector<Point> out;
    for (size_t k = 0; k < ArraySize(); ++k) {
      out.push_back((*this)[k].PointValue(dim < 0 && !out.empty() ? out[0].size() : dim));
    }
    return out;
  }
  std::vector<double> Doubles() const {
    std::vector<double> out;
    for (size_t k = 0; k < ArraySize(); ++k) out.push_back((*this)[k].Double());
    return out;
  }

 private:
  const json& v_;
  std::string path_;
};

double OptDouble(const Node& n, const std::string& key, double fallback) {
  return n.Has(key) ? n[key].Double() : fallback;
}
long OptInteger(const Node& n, const std::string& key, long fallback, long lo) {
  return n.Has(key) ? n[key].Integer(lo) : fallback;
}

Box ParseBox(const Node& n) {
  Box b{n["lower"].PointValue(), Point()};
  b.upper = n["upper"].PointValue(b.lower.size());
  for (int k = 0; k < b.dim(); ++k) {
    if (!(b.lower[k] < b.upper[k])) Fail(n.path(), "lower must be below upper on every axis");
  }
  return b;
}

PartitionSpec ParsePartition(const Node& n) {
  PartitionSpec p;
  const std::string type = n["type"].String();
  if (type == "box") {
    p.kind = PartitionSpec::Kind::kBox;
    p.box = ParseBox(n);
    Node counts = n["counts"];
    if (static_cast<int>(counts.ArraySize()) != p.box.dim()) {
      Fail(counts.path(), "one count per axis expected");
    }
    for (size_t k = 0; k < counts.ArraySize(); ++k) p.counts.push_back(counts[k].Integer(1));
    if (n.Has("holes")) {
      Node holes = n["holes"];
      for (size_t k = 0; k < holes.ArraySize(); ++k) {
        Box h = ParseBox(holes[k]);
        if (h.dim() != p.box.dim()) Fail(holes[k].path(), "hole dimension differs from the box");
        p.holes.push_back(h);
      }
    }
  } else if (type == "simplex") {
    p.kind = PartitionSpec::Kind::kSimplex;
    p.corners = n["corners"].Points();
    if (static_cast<int>(p.corners.size()) != p.corners[0].size() + 1) {
      Fail(n["corners"].path(), "a d-simplex needs d+1 corners");
    }
    p.count = static_cast<int>(OptInteger(n, "count", 1, 1));
  } else if (type == "points") {
    p.kind = PartitionSpec::Kind::kPoints;
    p.points = n["points"].Points();
  } else {
    Fail(n["type"].path(), "unknown partition type '" + type + "' (box, simplex, points)");
  }
  return p;
}

MeasureSpec ParseMeasure(const Node& n, const PartitionSpec& part) {
  MeasureSpec m;
  const std::string type = n["type"].String();
  if (type == "uniform") {
    m.kind = MeasureSpec::Kind::kUniform;
  } else if (type == "density") {
    m.kind = MeasureSpec::Kind::kDensity;
    if (part.kind == PartitionSpec::Kind::kPoints) Fail(n.path(), "densities need a box or simplex partition");
    m.values = n["values"].Doubles();
    for (size_t k = 0; k < m.values.size(); ++k) {
      if (m.values[k] < 0.0) Fail(n["values"][k].path(), "density values must be nonnegative");
    }
  } else if (type == "random_density") {
    m.kind = MeasureSpec::Kind::kRandomDensity;
    if (part.kind == PartitionSpec::Kind::kPoints) Fail(n.path(), "densities need a box or simplex partition");
    if (n.Has("seed")) {
      m.seed = static_cast<uint64_t>(n["seed"].Integer(0));
      m.has_seed = true;
    }
  } else if (type == "discrete") {
    m.kind = MeasureSpec::Kind::kDiscrete;
    if (n.Has("points")) m.points = n["points"].Points(part.dim());
    m.weights = n["weights"].Doubles();
    const size_t expected = m.points.empty() ? part.points.size() : m.points.size();
    if (m.points.empty() && part.kind != PartitionSpec::Kind::kPoints) {
      Fail(n.path(), "discrete measures on a box or simplex partition need explicit points");
    }
    if (m.weights.size() != expected) Fail(n["weights"].path(), "one weight per point expected");
    for (size_t k = 0; k < m.weights.size(); ++k) {
      if (m.weights[k] < 0.0) Fail(n["weights"][k].path(), "weights must be nonnegative");
    }
  } else {
    Fail(n["type"].path(),
         "unknown measure type '" + type + "' (uniform, density, random_density, discrete)");
  }
  return m;
}

std::vector<double> SizedDoubles(const Node& n, size_t size) {
  std::vector<double> v = n.Doubles();
  if (v.size() != size) Fail(n.path(), "one value per category expected");
  return v;
}

ProblemSpec ParseProblem(const Node& n, int num_categories) {
  ProblemSpec p;
  p.family = n["family"].String();
  const size_t nc = static_cast<size_t>(num_categories);
  if (p.family == "business_location") {
    p.stations = n["stations"].Points(2);
    p.c_walk = OptDouble(n, "c_walk", p.c_walk);
    p.c_train = OptDouble(n, "c_train", p.c_train);
    p.c_restock = OptDouble(n, "c_restock", p.c_restock);
  } else if (p.family == "barycenter") {
    p.weights = n.Has("weights") ? SizedDoubles(n["weights"], nc)
                                 : std::vector<double>(nc, 1.0 / num_categories);
  } else if (p.family == "capped_affine") {
    p.random = n.Has("random") && n["random"].value().is_boolean() && n["random"].value().get<bool>();
    if (!p.random) {
      p.directions = n["directions"].Points();
      if (p.directions.size() != nc) Fail(n["directions"].path(), "one direction per category expected");
      p.kappa1 = SizedDoubles(n["kappa1"], nc);
      p.kappa2 = SizedDoubles(n["kappa2"], nc);
    }
  } else if (p.family == "weighted_l1") {
    p.scale = SizedDoubles(n["scale"], nc);
    p.offset = n.Has("offset") ? SizedDoubles(n["offset"], nc) : std::vector<double>(nc, 0.0);
  } else if (p.family == "tabulated") {
    Node tables = n["tables"];
    if (tables.ArraySize() != nc) Fail(tables.path(), "one table per category expected");
    for (size_t i = 0; i < nc; ++i) {
      Node rows = tables[i];
      const size_t r = rows.ArraySize();
      if (r == 0) Fail(rows.path(), "empty table");
      const size_t c = rows[0].ArraySize();
      Matrix t(r, c);
      for (size_t a = 0; a < r; ++a) {
        std::vector<double> row = rows[a].Doubles();
        if (row.size() != c) Fail(rows[a].path(), "ragged table");
        for (size_t b = 0; b < c; ++b) t(a, b) = row[b];
      }
      p.tables.push_back(t);
    }
  } else {
    Fail(n["family"].path(), "unknown family '" + p.family +
                                 "' (business_location, barycenter, capped_affine, weighted_l1, tabulated)");
  }
  return p;
}

}  // namespace

int PartitionSpec::dim() const {
  switch (kind) {
    case Kind::kBox: return box.dim();
    case Kind::kSimplex: return static_cast<int>(corners[0].size());
    case Kind::kPoints: return static_cast<int>(points[0].size());
  }
  return 0;
}

ComplexPtr PartitionSpec::Build() const {
  switch (kind) {
    case Kind::kBox:
      return std::make_shared<const SimplicialComplex>(
          SimplicialComplex::BoxPartition(box, counts, holes));
    case Kind::kSimplex:
      return std::make_shared<const SimplicialComplex>(
          SimplicialComplex::SimplexPartition(corners, count));
    case Kind::kPoints:
      return std::make_shared<const SimplicialComplex>(SimplicialComplex::PointSet(points));
  }
  return nullptr;
}

RunConfig ParseConfig(const json& doc) {
  Node root(doc, "");
  if (!doc.is_object()) Fail("", "expected an object");
  RunConfig c;
  c.source = doc;
  c.seed = static_cast<uint64_t>(OptInteger(root, "seed", 1, 0));

  Node cats = root["categories"];
  if (cats.ArraySize() == 0) Fail(cats.path(), "at least one category is required");
  for (size_t i = 0; i < cats.ArraySize(); ++i) {
    CategorySpec cs;
    cs.partition = ParsePartition(cats[i]["partition"]);
    cs.measure = cats[i].Has("measure") ? ParseMeasure(cats[i]["measure"], cs.partition) : MeasureSpec{};
    c.categories.push_back(std::move(cs));
  }
  c.quality = ParsePartition(root["quality"]["partition"]);
  c.problem = ParseProblem(root["problem"], c.num_categories());

  c.eps_lsip = root["eps_lsip"].Positive();
  if (root.Has("tau")) {
    c.tau = root["tau"].Double();
    if (c.tau < 0.0 || c.tau >= c.eps_lsip / c.num_categories()) {
      Fail("/tau", "must satisfy 0 <= tau < eps_lsip / N");
    }
  }
  if (root.Has("oracle")) {
    c.oracle = root["oracle"].String();
    if (c.oracle != "auto" && c.oracle != "cell_cpwa" && c.oracle != "quadratic" &&
        c.oracle != "lipschitz_grid") {
      Fail("/oracle", "unknown oracle '" + c.oracle + "'");
    }
  }
  c.max_iterations = static_cast<int>(OptInteger(root, "max_iterations", c.max_iterations, 1));
  c.threads = static_cast<int>(OptInteger(root, "threads", 0, 0));

  EquilibriumOptions& eq = c.equilibrium;
  if (root.Has("mc")) {
    Node mc = root["mc"];
    eq.samples = OptInteger(mc, "n", eq.samples, 1);
    eq.repetitions = static_cast<int>(OptInteger(mc, "repetitions", eq.repetitions, 1));
    eq.exact_limit = OptInteger(mc, "exact_limit", eq.exact_limit, 0);
    eq.diagnostic_samples = static_cast<int>(OptInteger(mc, "diagnostic_samples", eq.diagnostic_samples, 1));
    eq.diagnostic_grid = static_cast<int>(OptInteger(mc, "diagnostic_grid", eq.diagnostic_grid, 1));
  }
  if (root.Has("i_hat")) {
    Node ih = root["i_hat"];
    if (ih.value().is_string()) {
      if (ih.String() != "auto") Fail(ih.path(), "expected \"auto\" or a category index");
    } else {
      eq.i_hat = static_cast<int>(ih.Integer(0));
      if (eq.i_hat >= c.num_categories()) Fail(ih.path(), "category index out of range");
    }
  }
  if (root.Has("transport")) {
    Node t = root["transport"];
    SemiDiscreteOptions& s = eq.transport;
    s.iterations = static_cast<int>(OptInteger(t, "iterations", s.iterations, 1));
    s.minibatch = static_cast<int>(OptInteger(t, "minibatch", s.minibatch, 1));
    s.step0 = OptDouble(t, "step0", s.step0);
    s.tol_mass = OptDouble(t, "tol_mass", s.tol_mass);
    s.validation_samples = static_cast<int>(OptInteger(t, "validation_samples", s.validation_samples, 1));
    s.max_trials = static_cast<int>(OptInteger(t, "max_trials", s.max_trials, 1));
  }
  if (root.Has("output")) {
    Node o = root["output"];
    c.output.transfer_grid = static_cast<int>(OptInteger(o, "transfer_grid", c.output.transfer_grid, 1));
    c.output.coupling_samples =
        static_cast<int>(OptInteger(o, "coupling_samples", c.output.coupling_samples, 0));
    c.output.histogram_bins = static_cast<int>(OptInteger(o, "histogram_bins", c.output.histogram_bins, 1));
  }
  SetSeed(c, c.seed);

  // Cross-field checks.
  const ProblemSpec& p = c.problem;
  for (int i = 0; i < c.num_categories(); ++i) {
    const std::string where = "/categories/" + std::to_string(i) + "/partition";
    const int d = c.categories[i].partition.dim();
    if ((p.family == "business_location" && d != 2) || (p.family == "capped_affine" && d != 1)) {
      Fail(where, "wrong type dimension for family " + p.family);
    }
    if (p.family == "tabulated") {
      if (c.categories[i].partition.kind != PartitionSpec::Kind::kPoints) {
        Fail(where, "tabulated costs need point partitions");
      }
      if (p.tables[i].rows() != static_cast<int>(c.categories[i].partition.points.size())) {
        Fail("/problem/tables/" + std::to_string(i), "one row per type point expected");
      }
    }
    if (p.family == "weighted_l1" && d != c.quality.dim()) {
      Fail(where, "types and qualities must share a dimension");
    }
  }
  if (p.family == "business_location" && c.quality.dim() != 2) {
    Fail("/quality/partition", "business location qualities are planar");
  }
  if (p.family == "barycenter") {
    for (int i = 0; i < c.num_categories(); ++i) {
      if (c.categories[i].partition.dim() != c.quality.dim()) {
        Fail("/categories/" + std::to_string(i) + "/partition",
             "types and qualities must share a dimension");
      }
    }
  }
  if (p.family == "tabulated") {
    if (c.quality.kind != PartitionSpec::Kind::kPoints) {
      Fail("/quality/partition", "tabulated costs need point partitions");
    }
    for (int i = 0; i < c.num_categories(); ++i) {
      if (p.tables[i].cols() != static_cast<int>(c.quality.points.size())) {
        Fail("/problem/tables/" + std::to_string(i), "one column per quality point expected");
      }
    }
  }
  if (p.family == "capped_affine" && !p.random) {
    for (int i = 0; i < c.num_categories(); ++i) {
      if (p.directions[i].size() != c.quality.dim()) {
        Fail("/problem/directions/" + std::to_string(i), "direction dimension differs from Z");
      }
    }
  }
  for (int i = 0; i < c.num_categories(); ++i) {
    const MeasureSpec& m = c.categories[i].measure;
    const std::string where = "/categories/" + std::to_string(i) + "/measure";
    if (m.kind == MeasureSpec::Kind::kDensity &&
        static_cast<int>(m.values.size()) != c.categories[i].partition.Build()->num_vertices()) {
      Fail(where + "/values", "one density value per partition vertex expected");
    }
  }
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, kModule, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, kModule, "/: " + std::string(e.what()));
  }
  return ParseConfig(doc);
}

void SetSeed(RunConfig& config, uint64_t seed) {
  config.seed = seed;
  config.equilibrium.seed = seed;
}

CostPtr BuildCost(const RunConfig& config, const std::vector<ComplexPtr>& types,
                  const ComplexPtr& quality) {
  const ProblemSpec& p = config.problem;
  const int n = config.num_categories();
  if (p.family == "business_location") {
    return std::make_shared<BusinessLocationCost>(n, p.stations, p.c_walk, p.c_train, p.c_restock);
  }
  if (p.family == "barycenter") {
    std::vector<double> radius;
    for (const ComplexPtr& t : types) radius.push_back(MaxNorm(*t));
    return std::make_shared<BarycenterCost>(p.weights, radius, MaxNorm(*quality));
  }
  if (p.family == "capped_affine") {
    if (p.random) {
      Rng rng = MakeRng(config.seed, 3000);
      return std::make_shared<CappedAffineCost>(CappedAffineCost::Random(n, rng));
    }
    return std::make_shared<CappedAffineCost>(p.directions, p.kappa1, p.kappa2);
  }
  if (p.family == "weighted_l1") {
    return std::make_shared<WeightedL1Cost>(p.scale, p.offset, quality->dim());
  }
  std::vector<std::vector<Point>> tp;
  for (const ComplexPtr& t : types) tp.push_back(t->vertices());
  return std::make_shared<TabulatedCost>(tp, quality->vertices(), p.tables);
}

std::shared_ptr<const Instance> BuildInstance(const RunConfig& config) {
  const int n = config.num_categories();
  std::vector<ComplexPtr> types;
  std::vector<HatBasis> bases;
  std::vector<Measure> measures;
  for (int i = 0; i < n; ++i) {
    const CategorySpec& cs = config.categories[i];
    ComplexPtr c = cs.partition.Build();
    types.push_back(c);
    bases.emplace_back(c);
    const MeasureSpec& m = cs.measure;
    switch (m.kind) {
      case MeasureSpec::Kind::kUniform:
        if (c->is_point_set()) {
          measures.emplace_back(DiscreteMeasure(
              c->vertices(), std::vector<double>(c->num_vertices(), 1.0 / c->num_vertices())));
        } else {
          double vol = 0.0;
          for (int s = 0; s < c->num_simplices(); ++s) vol += c->Volume(s);
          measures.emplace_back(CpwaMeasure(c, Vector::Constant(c->num_vertices(), 1.0 / vol)));
        }
        break;
      case MeasureSpec::Kind::kDensity: {
        // Values are taken up to scale.
        Vector v = Eigen::Map<const Vector>(m.values.data(), static_cast<Eigen::Index>(m.values.size()));
        double total = 0.0;
        for (int s = 0; s < c->num_simplices(); ++s) {
          double sum = 0.0;
          for (int u : c->simplex(s)) sum += v[u];
          total += c->Volume(s) * sum / (c->dim() + 1);
        }
        if (!(total > 0.0)) {
          Fail("/categories/" + std::to_string(i) + "/measure/values", "density has zero mass");
        }
        measures.emplace_back(CpwaMeasure(c, v / total));
        break;
      }
      case MeasureSpec::Kind::kRandomDensity: {
        Rng rng = m.has_seed ? MakeRng(m.seed, 0) : MakeRng(config.seed, 2000 + i);
        measures.emplace_back(RandomCpwaDensity(c, rng));
        break;
      }
      case MeasureSpec::Kind::kDiscrete: {
        std::vector<Point> pts = m.points.empty() ? c->vertices() : m.points;
        measures.emplace_back(DiscreteMeasure(pts, m.weights));
        break;
      }
    }
  }
  ComplexPtr z = config.quality.Build();
  CostPtr cost = BuildCost(config, types, z);
  return std::make_shared<const Instance>(
      Instance::Make(cost, std::move(bases), HatBasis(z), std::move(measures)));
}

std::string Digest(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace teamsolve
