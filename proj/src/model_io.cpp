#include "fourbar/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "fourbar/errors.hpp"

namespace fourbar {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

ordered_json complex_json(const std::complex<double>& z) {
  return ordered_json::array({hexfloat(z.real()), hexfloat(z.imag())});
}

std::complex<double> complex_from(const ordered_json& j) {
  return {parse_hexfloat(j.at(0).get<std::string>()), parse_hexfloat(j.at(1).get<std::string>())};
}

ordered_json vec3_json(const Vec3& v) {
  return ordered_json::array({hexfloat(v.x()), hexfloat(v.y()), hexfloat(v.z())});
}

Vec3 vec3_from(const ordered_json& j) {
  return Vec3(parse_hexfloat(j.at(0).get<std::string>()),
              parse_hexfloat(j.at(1).get<std::string>()),
              parse_hexfloat(j.at(2).get<std::string>()));
}

const char* kind_name(ChebTerm::Kind k) {
  switch (k) {
    case ChebTerm::Kind::product: return "product";
    case ChebTerm::Kind::sym: return "sym";
    default: return "antisym";
  }
}

ChebTerm::Kind kind_from(const std::string& s) {
  if (s == "product") return ChebTerm::Kind::product;
  if (s == "sym") return ChebTerm::Kind::sym;
  if (s == "antisym") return ChebTerm::Kind::antisym;
  throw ConfigError("unknown basis term kind: " + s);
}

CharPair pair_from(const std::string& s) {
  if (s == "c12") return CharPair::c12;
  if (s == "c13") return CharPair::c13;
  if (s == "c23") return CharPair::c23;
  throw ConfigError("unknown line-characteristic pair: " + s);
}

}  // namespace

std::string hexfloat(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ConfigError("unparseable float literal: " + s);
  return v;
}

void save_model(const BlendedModel& model, const std::string& path) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["delta"] = vec3_json(model.plan.delta);
  j["origin_shift"] = vec3_json(model.plan.origin_shift);
  j["shifts"] = ordered_json::array();
  for (const auto& s : model.plan.shifts) j["shifts"].push_back(vec3_json(s));
  j["counts"] = model.plan.counts;
  j["which_pair"] = char_pair_name(model.which_pair);

  j["basis"] = ordered_json::array();
  for (const auto& t : model.basis)
    j["basis"].push_back({{"kind", kind_name(t.kind)}, {"m", t.m}, {"n", t.n}});

  j["pq_scaling"] = {{"p_lo", hexfloat(model.scaling.p_lo)},
                     {"p_hi", hexfloat(model.scaling.p_hi)},
                     {"q_lo", hexfloat(model.scaling.q_lo)},
                     {"q_hi", hexfloat(model.scaling.q_hi)}};

  j["anchors"] = ordered_json::array();
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i)
    j["anchors"].push_back(
        ordered_json::array({hexfloat(model.anchors(i, 0)), hexfloat(model.anchors(i, 1))}));
  j["anchor_p"] = ordered_json::array();
  for (Eigen::Index i = 0; i < model.anchor_p.size(); ++i)
    j["anchor_p"].push_back(hexfloat(model.anchor_p[i]));

  j["lines"] = ordered_json::array();
  for (const auto& lm : model.lines) {
    ordered_json line;
    line["n_terms"] = lm.n_terms;
    line["beta"] = ordered_json::array();
    line["mu"] = ordered_json::array();
    line["lambda"] = ordered_json::array();
    for (int t = 0; t < lm.n_terms; ++t) {
      line["beta"].push_back(complex_json(lm.coefficients[t]));
      line["mu"].push_back(complex_json(lm.nodes[t]));
      line["lambda"].push_back(complex_json(lm.log_nodes[t]));
    }
    line["fit_residual"] = hexfloat(lm.fit_residual);
    line["warnings"] = lm.warnings;
    j["lines"].push_back(std::move(line));
  }

  j["tau"] = ordered_json::array();
  for (const auto& t : model.tau) {
    ordered_json table = ordered_json::array();
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < t.cols(); ++c) row.push_back(complex_json(t(r, c)));
      table.push_back(std::move(row));
    }
    j["tau"].push_back(std::move(table));
  }

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file: " + path);
  out << j.dump(1) << "\n";
}

BlendedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read model file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("model file parse error: " + std::string(e.what()));
  }
  if (j.value("format_version", -1) != kFormatVersion)
    throw ConfigError("unsupported model format_version");

  BlendedModel model;
  model.plan.delta = vec3_from(j.at("delta"));
  model.plan.origin_shift = vec3_from(j.at("origin_shift"));
  for (const auto& s : j.at("shifts")) model.plan.shifts.push_back(vec3_from(s));
  model.plan.counts = j.at("counts").get<std::vector<int>>();
  model.which_pair = pair_from(j.at("which_pair").get<std::string>());

  for (const auto& t : j.at("basis"))
    model.basis.push_back({kind_from(t.at("kind").get<std::string>()), t.at("m").get<int>(),
                           t.at("n").get<int>()});

  const auto& sc = j.at("pq_scaling");
  model.scaling.p_lo = parse_hexfloat(sc.at("p_lo").get<std::string>());
  model.scaling.p_hi = parse_hexfloat(sc.at("p_hi").get<std::string>());
  model.scaling.q_lo = parse_hexfloat(sc.at("q_lo").get<std::string>());
  model.scaling.q_hi = parse_hexfloat(sc.at("q_hi").get<std::string>());

  const auto& anchors = j.at("anchors");
  model.anchors.resize(Eigen::Index(anchors.size()), 2);
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    model.anchors(i, 0) = parse_hexfloat(anchors.at(i).at(0).get<std::string>());
    model.anchors(i, 1) = parse_hexfloat(anchors.at(i).at(1).get<std::string>());
  }
  const auto& ap = j.at("anchor_p");
  model.anchor_p.resize(Eigen::Index(ap.size()));
  for (Eigen::Index i = 0; i < model.anchor_p.size(); ++i)
    model.anchor_p[i] = parse_hexfloat(ap.at(i).get<std::string>());

  for (const auto& line : j.at("lines")) {
    LineExpModel lm;
    lm.n_terms = line.at("n_terms").get<int>();
    lm.coefficients.resize(lm.n_terms);
    lm.nodes.resize(lm.n_terms);
    lm.log_nodes.resize(lm.n_terms);
    for (int t = 0; t < lm.n_terms; ++t) {
      lm.coefficients[t] = complex_from(line.at("beta").at(t));
      lm.nodes[t] = complex_from(line.at("mu").at(t));
      lm.log_nodes[t] = complex_from(line.at("lambda").at(t));
    }
    lm.fit_residual = parse_hexfloat(line.at("fit_residual").get<std::string>());
    lm.warnings = line.at("warnings").get<std::vector<std::string>>();
    model.lines.push_back(std::move(lm));
  }

  for (const auto& table : j.at("tau")) {
    Eigen::MatrixXcd t(Eigen::Index(table.size()), Eigen::Index(model.basis.size()));
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = complex_from(table.at(r).at(c));
    model.tau.push_back(std::move(t));
  }
  return model;
}

}  // namespace fourbar
