/*
==================================================================================
   Copyright (c) 2026 The pcl-slicing Authors.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
==================================================================================
*/

#pragma once

#include <stdexcept>
#include <string>

namespace pcl {

// Root of every error raised by the library. The CLI maps ConfigError to exit
// code 2 and everything else to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller broke a precondition (bad shape, negative count, NaN in a window).
class ContractError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long row = -1)
        : Error(row >= 0 ? "row " + std::to_string(row) + ": " + what : what), row_(row) {}
    long row() const noexcept { return row_; }

private:
    long row_;
};

class RangeError : public ParseError {
public:
    using ParseError::ParseError;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public TrainingError {
public:
    DivergenceError(int epoch)
        : TrainingError("training diverged (non-finite loss) at epoch " + std::to_string(epoch)), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class FitError : public Error {
public:
    using Error::Error;
};

class LoopError : public Error {
public:
    using Error::Error;
};

class TranslationError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class BackpressureError : public Error {
public:
    using Error::Error;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

// An artifact another subcommand produces is missing or stale.
class PrerequisiteError : public Error {
public:
    using Error::Error;
};

}  // namespace pcl
