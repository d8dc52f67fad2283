/*
 * Copyright 2026 The STARE Authors.
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

#include "stare/log.h"

#include <iostream>
#include <mutex>
#include <utility>

#include "stare/status.h"

namespace stare {
namespace {

std::mutex& HandlerMutex() {
  static std::mutex mu;
  return mu;
}

WarningHandler& CurrentHandler() {
  static WarningHandler handler = [](const std::string& message) {
    std::clog << "warning: " << message << "\n";
  };
  return handler;
}

}  // namespace

WarningHandler SetWarningHandler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(HandlerMutex());
  WarningHandler previous = std::move(CurrentHandler());
  CurrentHandler() = handler ? std::move(handler)
                             : [](const std::string&) {};
  return previous;
}

void Warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(HandlerMutex());
  CurrentHandler()(message);
}

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kManifestError: return "ManifestError";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kDuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::kNotCanonical: return "NotCanonical";
    case ErrorCode::kAlreadyCanonical: return "AlreadyCanonical";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kUnknownDetector: return "UnknownDetector";
    case ErrorCode::kDetectorSetMismatch: return "DetectorSetMismatch";
    case ErrorCode::kEmptySubset: return "EmptySubset";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSubsampleTooLarge: return "SubsampleTooLarge";
    case ErrorCode::kInvalidForestParams: return "InvalidForestParams";
    case ErrorCode::kForestNotFitted: return "ForestNotFitted";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kTooManyDetectors: return "TooManyDetectors";
    case ErrorCode::kSizeExceedsHeldOut: return "SizeExceedsHeldOut";
    case ErrorCode::kResampleExhausted: return "ResampleExhausted";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace stare
