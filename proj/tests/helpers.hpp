/*
 * Copyright 2026 The UP-AR Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Small fixtures shared by the unit tests.

#ifndef UPAR_TESTS_HELPERS_HPP
#define UPAR_TESTS_HELPERS_HPP

#include <string>
#include <vector>

#include "upar/data.hpp"

namespace upar::testing {

inline FeatureSpec continuous(std::string name, double lo, double hi, double step,
                              bool actionable = true,
                              Monotonicity mono = Monotonicity::kFree) {
  FeatureSpec f;
  f.name = std::move(name);
  f.kind = FeatureKind::kContinuous;
  f.actionable = actionable;
  f.monotonicity = mono;
  f.domain_min = lo;
  f.domain_max = hi;
  f.default_step = step;
  return f;
}

inline FeatureSpec categorical(std::string name, std::vector<double> values,
                               bool actionable = true,
                               Monotonicity mono = Monotonicity::kFree) {
  FeatureSpec f;
  f.name = std::move(name);
  f.kind = FeatureKind::kCategorical;
  f.actionable = actionable;
  f.monotonicity = mono;
  f.allowed_values = std::move(values);
  return f;
}

inline DatasetSchema make_schema(std::vector<FeatureSpec> features) {
  return DatasetSchema(std::move(features), "y", "1");
}

// A[0,100] and B[0,50] actionable, C[0,10] and D in {0,1} fixed.
inline DatasetSchema two_actionable_schema() {
  return make_schema({continuous("A", 0, 100, 1), continuous("B", 0, 50, 0.5),
                      continuous("C", 0, 10, 0.1, false), categorical("D", {0, 1}, false)});
}

inline std::string data_path(const std::string& rel) {
  return std::string(UPAR_TEST_DATA_DIR) + "/" + rel;
}

}  // namespace upar::testing

#endif  // UPAR_TESTS_HELPERS_HPP
