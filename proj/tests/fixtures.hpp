#pragma once

#include <string>

#include "nmvm/model.hpp"
#include "nmvm/model_io.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) { return std::string(NMVM_DATA_DIR) + "/" + rel; }

inline nmvm::NmvmModel first_fit() { return nmvm::load_model(data_path("models/first_fit.model")); }
inline nmvm::NmvmModel second_fit() {
  return nmvm::load_model(data_path("models/second_fit.model"));
}

inline nmvm::Gig first_fit_gig() { return nmvm::Gig{-0.5, 0.87953198, 0.645169932}; }
inline nmvm::Gig second_fit_gig() { return nmvm::Gig{-0.378655004, 0.379275063, 0.371543387}; }

}  // namespace fixtures
