#pragma once

#include <stdexcept>
#include <string>

namespace kac {

// Root type for all library errors; callers who do not care about the kind
// can catch this one.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct size_error : error { using error::error; };        // enumeration cap exceeded
struct domain_error : error { using error::error; };      // argument outside mathematical domain
struct index_error : error { using error::error; };
struct incomplete_input_error : error { using error::error; };  // missing moment/cumulant entry
struct solver_error : error { using error::error; };      // singular or ill-conditioned system
struct divergence_error : error { using error::error; };  // non-finite value during integration
struct sampling_error : error { using error::error; };    // estimator precondition violated
struct insufficient_signal_error : error { using error::error; };
struct degenerate_density_error : error { using error::error; };
struct usage_error : error { using error::error; };       // CLI / config problems

} // namespace kac
