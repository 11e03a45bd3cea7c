// Acceptance runner: one pass/fail line per criterion, nonzero exit on any
// failure.  Usage: kac_acceptance [fast|full] [threads]

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "kac/acceptance.hpp"

int main(int argc, char** argv) {
    std::string suite = argc > 1 ? argv[1] : "full";
    int threads = argc > 2 ? std::atoi(argv[2])
                           : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    try {
        auto results = kac::run_acceptance(suite, std::cout, threads);
        bool all = true;
        for (const auto& r : results) all = all && r.pass;
        std::cout << (all ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " (" << suite
                  << " suite)" << std::endl;
        return all ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << std::endl;
        return 2;
    }
}
