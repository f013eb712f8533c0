// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#pragma once

#include <stdexcept>
#include <string>

namespace recaudit {

/// Broad failure classes. Each maps onto one CLI exit status.
enum class ErrorKind {
    Config,     // bad configuration, missing files, bad flags
    Data,       // malformed or inconsistent input data
    Invariant,  // contract violated by a caller or an internal bug
};

int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define RECAUDIT_DEFINE_ERROR(Name, Kind)                                           \
    class Name : public Error {                                                     \
    public:                                                                         \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}    \
    }

RECAUDIT_DEFINE_ERROR(ConfigError, Config);
RECAUDIT_DEFINE_ERROR(ParseError, Data);
RECAUDIT_DEFINE_ERROR(IngestError, Data);
RECAUDIT_DEFINE_ERROR(LookupError, Data);
RECAUDIT_DEFINE_ERROR(BuildError, Data);
RECAUDIT_DEFINE_ERROR(TuningError, Data);
RECAUDIT_DEFINE_ERROR(DetectorError, Data);
RECAUDIT_DEFINE_ERROR(PlaybackError, Data);
RECAUDIT_DEFINE_ERROR(EmissionError, Data);
RECAUDIT_DEFINE_ERROR(ContractError, Invariant);

#undef RECAUDIT_DEFINE_ERROR

}  // namespace recaudit
