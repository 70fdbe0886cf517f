#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmvsc {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValueError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class SizeGuard : public Error {
public:
    using Error::Error;
};

class DegenerateGraph : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    RankDeficient(const std::string& what, std::size_t numerical_rank)
        : Error(what), rank_(numerical_rank) {}
    std::size_t numerical_rank() const noexcept { return rank_; }

private:
    std::size_t rank_;
};

class ConvergenceError : public Error {
public:
    static constexpr std::size_t kNoSample = static_cast<std::size_t>(-1);

    ConvergenceError(const std::string& what, double residual,
                     std::size_t sample = kNoSample)
        : Error(what), residual_(residual), sample_(sample) {}
    double residual() const noexcept { return residual_; }
    std::size_t sample() const noexcept { return sample_; }

private:
    double residual_;
    std::size_t sample_;
};

/// Throws a copy of `e` with the same dynamic type and `prefix` prepended to
/// the message.
[[noreturn]] inline void rethrow_with_prefix(const Error& e, const std::string& prefix) {
    const std::string msg = prefix + e.what();
    if (auto* r = dynamic_cast<const RankDeficient*>(&e)) throw RankDeficient(msg, r->numerical_rank());
    if (auto* c = dynamic_cast<const ConvergenceError*>(&e))
        throw ConvergenceError(msg, c->residual(), c->sample());
    if (dynamic_cast<const DegenerateGraph*>(&e)) throw DegenerateGraph(msg);
    if (dynamic_cast<const DimensionMismatch*>(&e)) throw DimensionMismatch(msg);
    if (dynamic_cast<const LengthMismatch*>(&e)) throw LengthMismatch(msg);
    if (dynamic_cast<const SizeGuard*>(&e)) throw SizeGuard(msg);
    if (dynamic_cast<const ValueError*>(&e)) throw ValueError(msg);
    if (dynamic_cast<const ParseError*>(&e)) throw ParseError(msg);
    if (dynamic_cast<const IoError*>(&e)) throw IoError(msg);
    throw Error(msg);
}

} // namespace lmvsc
