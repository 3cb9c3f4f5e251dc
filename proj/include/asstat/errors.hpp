#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 The asstat Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <stdexcept>
#include <string>

namespace asstat {

/// Parameter outside the family domain (or on its boundary where the
/// quantity is singular).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Exact type-space enumeration would exceed the configured threshold.
class SizeError : public std::length_error
{
public:
  using std::length_error::length_error;
};

/// Lattice or code construction produced an empty / unusable object.
class ConstructionError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Numerical integration did not reach the requested accuracy.
class AccuracyError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace asstat
