#pragma once

#include "instances.hpp"
#include "rbce/error.hpp"

#include <gtest/gtest.h>

namespace rbce::test_support {

/// Error category thrown by `f`; records a test failure if nothing is thrown.
template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an rbce::Error";
    return ErrorCode::BadConfig;
}

}  // namespace rbce::test_support
