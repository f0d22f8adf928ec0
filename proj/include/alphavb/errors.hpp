// Copyright 2026 The alphavb Authors
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
#ifndef ALPHAVB_ERRORS_HPP
#define ALPHAVB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace alphavb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error
{
public:
  using Error::Error;
};

/// Raised instead of returning +inf when a divergence needs p << q and the
/// supports disagree (or, for Renyi, the pair is mutually singular).
class AbsoluteContinuityError : public Error
{
public:
  using Error::Error;
};

class NotPositiveDefinite : public Error
{
public:
  using Error::Error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

class BudgetExceeded : public Error
{
public:
  using Error::Error;
};

/// Every Monte-Carlo weight underflowed: the estimator has nothing to average.
class DegenerateEstimate : public Error
{
public:
  using Error::Error;
};

class SingularSystem : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what)
{
  if (!cond) throw InvalidArgument(what);
}

} // namespace alphavb

#endif
