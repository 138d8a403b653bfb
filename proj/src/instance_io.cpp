#include "mvhvi/instance_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "mvhvi/hypotheses.hpp"

namespace mvhvi {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const char* where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ParseError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

const json& require(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing key '") + key + "' in " + where);
  }
  return *it;
}

double as_number(const json& v, const char* where) {
  if (!v.is_number()) {
    throw ParseError(std::string("expected a number in ") + where);
  }
  return v.get<double>();
}

int as_positive_int(const json& v, const char* where) {
  if (!v.is_number_integer() || v.get<long>() < 1) {
    throw ParseError(std::string("expected a positive integer in ") + where);
  }
  return static_cast<int>(v.get<long>());
}

Vec parse_vector(const json& v, const char* where) {
  if (!v.is_array()) {
    throw ParseError(std::string("expected an array in ") + where);
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<int>(i)] = as_number(v[i], where);
  }
  return out;
}

Mat parse_matrix(const json& v, int rows, int cols, const char* where) {
  const Vec flat = parse_vector(v, where);
  if (flat.size() != static_cast<long>(rows) * cols) {
    std::ostringstream os;
    os << where << " must hold " << rows << "x" << cols
       << " row-major entries, got " << flat.size();
    throw ShapeError(os.str());
  }
  Mat out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = flat[r * cols + c];
  }
  return out;
}

PieceDesc parse_piece(const json& p) {
  if (!p.is_object()) throw ParseError("piece must be an object");
  const std::string kind = require(p, "kind", "piece").get<std::string>();
  PieceDesc d;
  if (kind == "affine") {
    reject_unknown(p, "affine piece", {"kind", "a", "b"});
    d.kind = PieceDesc::Kind::Affine;
    d.a = as_number(require(p, "a", "affine piece"), "piece.a");
    d.b = as_number(require(p, "b", "affine piece"), "piece.b");
  } else if (kind == "quad") {
    reject_unknown(p, "quad piece", {"kind", "q", "a", "b"});
    d.kind = PieceDesc::Kind::Quad;
    d.q = as_number(require(p, "q", "quad piece"), "piece.q");
    d.a = as_number(require(p, "a", "quad piece"), "piece.a");
    d.b = as_number(require(p, "b", "quad piece"), "piece.b");
  } else if (kind == "abs") {
    reject_unknown(p, "abs piece", {"kind", "w"});
    d.kind = PieceDesc::Kind::Abs;
    d.w = as_number(require(p, "w", "abs piece"), "piece.w");
  } else {
    throw ParseError("piece kind must be affine | quad | abs");
  }
  return d;
}

PiecewiseC1Spec parse_J(const json& j, int k) {
  if (!j.is_array()) throw ParseError("J must be an array of coordinates");
  if (static_cast<int>(j.size()) != k) {
    throw ShapeError("J must have exactly k coordinate entries");
  }
  std::vector<CoordinatePieces> coords;
  coords.reserve(k);
  for (const auto& cj : j) {
    if (!cj.is_object()) throw ParseError("J coordinate must be an object");
    reject_unknown(cj, "J coordinate", {"breakpoints", "pieces"});
    std::vector<double> bps;
    for (const auto& b : require(cj, "breakpoints", "J coordinate")) {
      bps.push_back(as_number(b, "breakpoint"));
    }
    const json& pj = require(cj, "pieces", "J coordinate");
    if (!pj.is_array()) throw ParseError("pieces must be an array");
    std::vector<PieceDesc> pieces;
    for (const auto& p : pj) pieces.push_back(parse_piece(p));
    coords.push_back(make_coordinate(std::move(bps), pieces));
  }
  return PiecewiseC1Spec(std::move(coords));
}

LambdaSet parse_lambda_set(const json& l, int m) {
  if (!l.is_object()) throw ParseError("lambda_set must be an object");
  reject_unknown(l, "lambda_set", {"variant", "params"});
  const std::string variant =
      require(l, "variant", "lambda_set").get<std::string>();
  json params = json::object();
  if (l.contains("params")) params = l["params"];
  if (!params.is_object()) throw ParseError("lambda_set.params must be an object");
  if (variant == "orthant") {
    reject_unknown(params, "orthant params", {});
    return LambdaSet::orthant(m);
  }
  if (variant == "box") {
    reject_unknown(params, "box params", {"upper"});
    Vec g = parse_vector(require(params, "upper", "box params"), "box.upper");
    if (g.size() != m) throw ShapeError("box upper bound must have m entries");
    return LambdaSet::box(std::move(g));
  }
  if (variant == "polyhedron") {
    reject_unknown(params, "polyhedron params", {"C", "d"});
    Vec d = parse_vector(require(params, "d", "polyhedron params"),
                         "polyhedron.d");
    Mat C = parse_matrix(require(params, "C", "polyhedron params"),
                         static_cast<int>(d.size()), m, "polyhedron.C");
    return LambdaSet::polyhedron(std::move(C), std::move(d));
  }
  throw ParseError("lambda_set.variant must be orthant | box | polyhedron");
}

HFunctionSpec parse_h(const json& h) {
  if (!h.is_object()) throw ParseError("h must be an object");
  reject_unknown(h, "h", {"form", "c_h", "tau"});
  const std::string form = require(h, "form", "h").get<std::string>();
  if (form == "zero") {
    return HFunctionSpec::zero();
  }
  if (form == "power") {
    const double c_h = as_number(require(h, "c_h", "h"), "h.c_h");
    const double tau = as_number(require(h, "tau", "h"), "h.tau");
    if (!(c_h > 0.0)) throw HypothesisError("h.c_h must be > 0");
    if (!(tau > 1.0)) throw HypothesisError("h.tau must be > 1");
    return HFunctionSpec::power(c_h, tau);
  }
  throw ParseError("h.form must be power | zero");
}

json piece_to_json(const CoordinatePieces& c, int p) {
  json out;
  if (c.v2[p] != 0.0) {
    out["kind"] = "quad";
    out["q"] = 2.0 * c.v2[p];
    out["a"] = c.v1[p];
    out["b"] = c.v0[p];
  } else {
    out["kind"] = "affine";
    out["a"] = c.v1[p];
    out["b"] = c.v0[p];
  }
  return out;
}

json matrix_to_json(const Mat& M) {
  json arr = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    for (int c = 0; c < M.cols(); ++c) arr.push_back(M(r, c));
  }
  return arr;
}

json vector_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

} // namespace

ProblemInstance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document must be an object");
  reject_unknown(doc, "instance",
                 {"dims", "A", "J", "gamma", "b", "lambda_set", "f", "h",
                  "profile"});

  const json& dj = require(doc, "dims", "instance");
  reject_unknown(dj, "dims", {"n", "m", "k"});
  SpaceDims dims;
  dims.n_V = as_positive_int(require(dj, "n", "dims"), "dims.n");
  dims.m_E = as_positive_int(require(dj, "m", "dims"), "dims.m");
  dims.k_X = as_positive_int(require(dj, "k", "dims"), "dims.k");

  ProblemInstance inst;
  inst.dims = dims;

  const json& aj = require(doc, "A", "instance");
  reject_unknown(aj, "A", {"P", "power", "m_A"});
  inst.A.P = parse_matrix(require(aj, "P", "A"), dims.n_V, dims.n_V, "A.P");
  const json& pw = require(aj, "power", "A");
  if (!pw.is_null()) {
    reject_unknown(pw, "A.power", {"p", "c"});
    PowerTerm t;
    t.exponent = as_number(require(pw, "p", "A.power"), "A.power.p");
    t.coeff = as_number(require(pw, "c", "A.power"), "A.power.c");
    inst.A.power = t;
  }
  inst.A.declared_m_A = as_number(require(aj, "m_A", "A"), "A.m_A");

  inst.J = parse_J(require(doc, "J", "instance"), dims.k_X);

  const json& gj = require(doc, "gamma", "instance");
  reject_unknown(gj, "gamma", {"G"});
  inst.gamma = GammaSpec::from_matrix(
      parse_matrix(require(gj, "G", "gamma"), dims.k_X, dims.n_V, "gamma.G"));

  const json& bj = require(doc, "b", "instance");
  reject_unknown(bj, "b", {"B"});
  inst.b.B = parse_matrix(require(bj, "B", "b"), dims.m_E, dims.n_V, "b.B");

  inst.Lambda = parse_lambda_set(require(doc, "lambda_set", "instance"),
                                 dims.m_E);
  inst.f = parse_vector(require(doc, "f", "instance"), "f");
  inst.h = parse_h(require(doc, "h", "instance"));

  const json& pj = require(doc, "profile", "instance");
  reject_unknown(pj, "profile", {"theta", "alpha_J", "beta_J", "m_J"});
  inst.profile.theta = ConstantInfo::declared(
      as_number(require(pj, "theta", "profile"), "profile.theta"));
  inst.profile.alpha_J = ConstantInfo::declared(
      as_number(require(pj, "alpha_J", "profile"), "profile.alpha_J"));
  inst.profile.beta_J = ConstantInfo::declared(
      as_number(require(pj, "beta_J", "profile"), "profile.beta_J"));
  inst.profile.m_J = ConstantInfo::declared(
      as_number(require(pj, "m_J", "profile"), "profile.m_J"));
  if (inst.profile.theta.value < 0.0) {
    throw HypothesisError("profile.theta must be >= 0");
  }
  if (inst.profile.alpha_J.value < 0.0) {
    throw HypothesisError("profile.alpha_J must be >= 0");
  }
  if (!(inst.profile.beta_J.value > 0.0)) {
    throw HypothesisError("profile.beta_J must be > 0");
  }
  if (inst.profile.m_J.value < 0.0) {
    throw HypothesisError("profile.m_J must be >= 0");
  }
  // The inf-sup constant is always computed from B, never declared.
  inst.profile.alpha_b = ConstantInfo::estimated(infsup_constant(inst.b), 0);

  inst.validate();
  return inst;
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string instance_to_json(const ProblemInstance& inst) {
  json doc;
  doc["dims"] = {{"n", inst.dims.n_V}, {"m", inst.dims.m_E},
                 {"k", inst.dims.k_X}};
  doc["A"]["P"] = matrix_to_json(inst.A.P);
  if (inst.A.power) {
    doc["A"]["power"] = {{"p", inst.A.power->exponent},
                         {"c", inst.A.power->coeff}};
  } else {
    doc["A"]["power"] = nullptr;
  }
  doc["A"]["m_A"] = inst.A.declared_m_A;
  json jarr = json::array();
  for (const auto& c : inst.J.coords()) {
    json cj;
    cj["breakpoints"] = c.breakpoints;
    json pieces = json::array();
    for (int p = 0; p < c.piece_count(); ++p) {
      pieces.push_back(piece_to_json(c, p));
    }
    cj["pieces"] = pieces;
    jarr.push_back(cj);
  }
  doc["J"] = jarr;
  doc["gamma"]["G"] = matrix_to_json(inst.gamma.G);
  doc["b"]["B"] = matrix_to_json(inst.b.B);
  switch (inst.Lambda.kind()) {
    case LambdaSet::Kind::NonnegativeOrthant:
      doc["lambda_set"] = {{"variant", "orthant"},
                           {"params", json::object()}};
      break;
    case LambdaSet::Kind::Box:
      doc["lambda_set"] = {
          {"variant", "box"},
          {"params", {{"upper", vector_to_json(inst.Lambda.upper())}}}};
      break;
    case LambdaSet::Kind::Polyhedron:
      doc["lambda_set"] = {
          {"variant", "polyhedron"},
          {"params",
           {{"C", matrix_to_json(inst.Lambda.C())},
            {"d", vector_to_json(inst.Lambda.d())}}}};
      break;
  }
  doc["f"] = vector_to_json(inst.f);
  if (inst.h.is_power()) {
    doc["h"] = {{"form", "power"}, {"c_h", inst.h.c_h}, {"tau", inst.h.tau}};
  } else {
    doc["h"] = {{"form", "zero"}};
  }
  doc["profile"] = {{"theta", inst.profile.theta.value},
                    {"alpha_J", inst.profile.alpha_J.value},
                    {"beta_J", inst.profile.beta_J.value},
                    {"m_J", inst.profile.m_J.value}};
  return doc.dump(2);
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << instance_to_json(inst) << "\n";
}

} // namespace mvhvi
