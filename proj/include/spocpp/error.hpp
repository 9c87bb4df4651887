/*
 * Copyright 2026 The spocpp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace spocpp {

enum class ErrorCode {
  parameter = 1,
  convergence,
  degenerate_spectrum,
  rank_deficient,
  vertex_degenerate,
  regularization,
  rank_estimation,
  size,
  domain,
  io,
};

/// Library-wide exception; `code` maps 1:1 onto the C API error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::vertex_degenerate: return "vertex_degenerate";
    case ErrorCode::regularization: return "regularization";
    case ErrorCode::rank_estimation: return "rank_estimation";
    case ErrorCode::size: return "size";
    case ErrorCode::domain: return "domain";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace spocpp
