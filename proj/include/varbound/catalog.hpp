#pragma once

#include <string>
#include <vector>

#include "varbound/procgen.hpp"

namespace varbound {

struct CatalogModel {
  std::string name;
  ProcessModel model;
};

struct CatalogRecursive {
  std::string name;
  RecursiveSpec spec;
};

// Built-in test models: scalar and vector, Gaussian and non-Gaussian,
// AR / MA / ARMA / VAR.
const std::vector<CatalogModel>& model_catalog();
const std::vector<CatalogRecursive>& recursive_catalog();

// ConfigError for unknown names.
const ProcessModel& catalog_model(const std::string& name);
const RecursiveSpec& catalog_recursive(const std::string& name);

}  // namespace varbound
