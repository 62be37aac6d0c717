#include "spde/testfns.hpp"

#include <cmath>
#include <sstream>

#include "spde/types.hpp"

namespace spde {

TestFunction TestFunction::gauss_exp(double c) {
  if (c < 0) throw ConfigError("gauss_exp needs c >= 0");
  TestFunction f;
  f.kind = Kind::gauss_exp;
  f.c = c;
  return f;
}

TestFunction TestFunction::coord_sigmoid(HVec w) {
  TestFunction f;
  f.kind = Kind::coord_sigmoid;
  f.w = std::move(w);
  return f;
}

TestFunction TestFunction::indicator_ball(HVec center, double radius) {
  if (radius <= 0) throw ConfigError("indicator_ball needs radius > 0");
  TestFunction f;
  f.kind = Kind::indicator_ball;
  f.center = std::move(center);
  f.radius = radius;
  return f;
}

double TestFunction::operator()(const HVec& x) const {
  switch (kind) {
    case Kind::gauss_exp:
      return std::exp(-c * norm_sq(x));
    case Kind::coord_sigmoid:
      return std::tanh(inner(x, w));
    case Kind::indicator_ball:
      return norm(sub(x, center)) <= radius ? 1.0 : 0.0;
  }
  return 0.0;
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::gauss_exp:
      os << "gauss_exp(c=" << c << ")";
      break;
    case Kind::coord_sigmoid:
      os << "coord_sigmoid(|w|=" << norm(w) << ")";
      break;
    case Kind::indicator_ball:
      os << "indicator_ball(r=" << radius << ")";
      break;
  }
  return os.str();
}

nlohmann::json TestFunction::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::gauss_exp:
      j["kind"] = "gauss_exp";
      j["c"] = c;
      break;
    case Kind::coord_sigmoid: {
      j["kind"] = "coord_sigmoid";
      j["w"] = std::vector<double>(w.data.data(), w.data.data() + w.data.size());
      break;
    }
    case Kind::indicator_ball: {
      j["kind"] = "indicator_ball";
      j["center"] = std::vector<double>(center.data.data(),
                                        center.data.data() + center.data.size());
      j["radius"] = radius;
      break;
    }
  }
  return j;
}

TestFunction TestFunction::from_json(const nlohmann::json& j,
                                     const SpaceSpec& space) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("test function document needs a \"kind\" field");
  std::string kind = j.at("kind").get<std::string>();

  auto get_vec = [&](const char* key) {
    if (!j.contains(key))
      throw ConfigError(std::string("test function missing \"") + key + "\"");
    auto vals = j.at(key).get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != space.dim())
      throw ConfigError(std::string("test function \"") + key +
                        "\" has the wrong dimension");
    HVec v = HVec::zero(space);
    for (int i = 0; i < space.dim(); ++i) v.data[i] = vals[i];
    return v;
  };

  if (kind == "gauss_exp") return gauss_exp(j.value("c", 0.5));
  if (kind == "coord_sigmoid") return coord_sigmoid(get_vec("w"));
  if (kind == "indicator_ball")
    return indicator_ball(get_vec("center"), j.value("radius", 1.0));
  throw ConfigError("unknown test function kind: " + kind);
}

}  // namespace spde
