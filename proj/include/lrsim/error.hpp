// Copyright 2026 The lrsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LRSIM_ERROR_HPP
#define LRSIM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrsim {

enum class ErrorKind {
  EmptyEdge,
  UnknownVertex,
  BadDimension,
  EmptySet,
  NotAnEdge,
  NoEdges,
  Disconnected,
  DimensionMismatch,
  NotHermitian,
  TimeOutsideSchedule,
  SupportNotInGraph,
  TooLarge,
  ToleranceNotMet,
  BadInterval,
  IndexOutOfRange,
  OddParity,
  InvalidArgument,
  ConfigParse,
  ModelInvalid,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyEdge: return "EmptyEdge";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::NotAnEdge: return "NotAnEdge";
    case ErrorKind::NoEdges: return "NoEdges";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::TimeOutsideSchedule: return "TimeOutsideSchedule";
    case ErrorKind::SupportNotInGraph: return "SupportNotInGraph";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::BadInterval: return "BadInterval";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::OddParity: return "OddParity";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::ModelInvalid: return "ModelInvalid";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lrsim

#endif  // LRSIM_ERROR_HPP
