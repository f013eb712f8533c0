// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The recaudit Authors

#include <recaudit/error.hpp>

namespace recaudit {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Config:
        return 2;
    case ErrorKind::Data:
        return 3;
    case ErrorKind::Invariant:
        return 4;
    }
    return 4;
}

}  // namespace recaudit
