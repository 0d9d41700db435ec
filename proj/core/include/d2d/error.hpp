// Copyright 2026 The d2d-auction Authors
//
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

#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

// Base of every error the library reports. Violations that are data (see
// validate_instance, check_incentive_compatibility) are returned, not thrown.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed MarketConfig / DynamicsConfig / ExperimentConfig.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Arguments that break an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// An allocation that breaks a demand, supply or edge constraint.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// Correction table lookups outside the calibrated grid, or expected-quantity
// tables that are not monotone enough to calibrate.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Closed-form evaluation outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace d2d
