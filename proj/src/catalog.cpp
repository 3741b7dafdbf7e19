#include "varbound/catalog.hpp"

#include "varbound/errors.hpp"

namespace varbound {
namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ProcessModel var1(Matrix a, InnovationSpec innov) {
  ProcessModel m;
  m.dim = 2;
  m.ar = {std::move(a)};
  m.innovation = std::move(innov);
  return m;
}

std::vector<CatalogModel> build_models() {
  using F = Family;
  auto s = [](F f, double var, double nu = 0.0) { return InnovationSpec::scalar(f, var, nu); };
  const Matrix sigma = mat2(1.0, 0.3, 0.3, 1.0);
  std::vector<CatalogModel> out = {
      {"white_gauss", ProcessModel::white(s(F::Gaussian, 1.0))},
      {"ar1_0.5", ProcessModel::arma({0.5}, {}, s(F::Gaussian, 1.0))},
      {"ar1_0.9", ProcessModel::arma({0.9}, {}, s(F::Gaussian, 1.0))},
      {"ar2", ProcessModel::arma({0.5, -0.3}, {}, s(F::Gaussian, 1.0))},
      {"ma1_0.5", ProcessModel::arma({}, {0.5}, s(F::Gaussian, 1.0))},
      {"ma2", ProcessModel::arma({}, {0.4, 0.2}, s(F::Gaussian, 1.5))},
      {"arma11", ProcessModel::arma({0.5}, {0.3}, s(F::Gaussian, 2.0))},
      {"arma21", ProcessModel::arma({0.6, -0.2}, {0.4}, s(F::Gaussian, 0.5))},
      {"iid_laplace", ProcessModel::white(s(F::Laplace, 1.0))},
      {"iid_uniform", ProcessModel::white(s(F::Uniform, 1.0))},
      {"ar1_student_t", ProcessModel::arma({0.5}, {}, s(F::StudentT, 1.0, 5.0))},
      {"ar1_laplace", ProcessModel::arma({0.5}, {}, s(F::Laplace, 1.0))},
      {"var1", var1(mat2(0.5, 0.1, 0.0, 0.3), InnovationSpec::vector(F::Gaussian, sigma))},
      {"var1_diag", var1(mat2(0.7, 0.0, 0.0, -0.4), InnovationSpec::vector(F::Gaussian, Matrix::Identity(2, 2)))},
      {"var1_laplace", var1(mat2(0.4, 0.2, -0.1, 0.3), InnovationSpec::vector(F::Laplace, Matrix::Identity(2, 2)))},
      {"white2", ProcessModel::white(InnovationSpec::vector(F::Gaussian, sigma))},
  };
  return out;
}

std::vector<CatalogRecursive> build_recursive() {
  using G = RecursiveSpec::GForm;
  using Fm = RecursiveSpec::FForm;
  auto spec = [](G g, Fm f, Matrix gain, double cap, InnovationSpec noise) {
    RecursiveSpec r;
    r.g_form = g;
    r.f_form = f;
    r.gain = std::move(gain);
    r.cap = cap;
    r.noise = std::move(noise);
    return r;
  };
  const Matrix i2 = Matrix::Identity(2, 2);
  const auto gauss2 = InnovationSpec::vector(Family::Gaussian, i2);
  const auto gauss1 = InnovationSpec::scalar(Family::Gaussian, 1.0);
  const Matrix half = Matrix::Constant(1, 1, -0.5);
  return {
      {"rec_zero", spec(G::Difference, Fm::Zero, Matrix::Zero(2, 2), 0.0, gauss2)},
      {"rec_linear", spec(G::Difference, Fm::Linear, half, 0.0, gauss1)},
      {"rec_identity", spec(G::Identity, Fm::Zero, Matrix::Zero(2, 2), 0.0, gauss2)},
      {"rec_saturated", spec(G::Difference, Fm::SaturatedLinear, half, 1.0, gauss1)},
      {"rec_second_difference", spec(G::SecondDifference, Fm::Zero, Matrix::Zero(1, 1), 0.0, gauss1)},
      {"rec_linear_laplace", spec(G::Difference, Fm::Linear, half, 0.0, InnovationSpec::scalar(Family::Laplace, 1.0))},
  };
}

}  // namespace

const std::vector<CatalogModel>& model_catalog() {
  static const std::vector<CatalogModel> models = build_models();
  return models;
}

const std::vector<CatalogRecursive>& recursive_catalog() {
  static const std::vector<CatalogRecursive> specs = build_recursive();
  return specs;
}

const ProcessModel& catalog_model(const std::string& name) {
  for (const auto& m : model_catalog()) {
    if (m.name == name) return m.model;
  }
  throw ConfigError("unknown catalog model '" + name + "'");
}

const RecursiveSpec& catalog_recursive(const std::string& name) {
  for (const auto& r : recursive_catalog()) {
    if (r.name == name) return r.spec;
  }
  throw ConfigError("unknown recursive spec '" + name + "'");
}

}  // namespace varbound
