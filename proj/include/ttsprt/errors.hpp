#pragma once

#include <stdexcept>
#include <string>

namespace ttsprt {

// Base of every error raised by the library. Callers that only need to know
// "the request was invalid" can catch this one type.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_mean_error : public error {
public:
    using error::error;
};

class index_error : public error {
public:
    using error::error;
};

class unpulled_arm_error : public error {
public:
    using error::error;
};

class domain_error : public error {
public:
    using error::error;
};

class ordering_error : public error {
public:
    using error::error;
};

class non_unique_best_error : public error {
public:
    using error::error;
};

class convergence_error : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

}  // namespace ttsprt
