#pragma once

#include <stdexcept>
#include <string>

namespace gwi {

// Base of every domain error. name() is the stable identifier printed by the CLI.
class DomainError : public std::runtime_error {
public:
    DomainError(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define GWI_DEFINE_ERROR(Type)                                                 \
    class Type : public DomainError {                                          \
    public:                                                                    \
        explicit Type(const std::string& what) : DomainError(#Type, what) {}   \
    };

GWI_DEFINE_ERROR(InvalidArgument)
GWI_DEFINE_ERROR(InvalidDistribution)
GWI_DEFINE_ERROR(CriticalityViolation)
GWI_DEFINE_ERROR(DegenerateLaw)
GWI_DEFINE_ERROR(PeriodicSupport)
GWI_DEFINE_ERROR(TruncationOverflow)
GWI_DEFINE_ERROR(NegativeCoefficient)
GWI_DEFINE_ERROR(ZeroSurvival)
GWI_DEFINE_ERROR(QuadratureFailure)
GWI_DEFINE_ERROR(NonConvergent)
GWI_DEFINE_ERROR(ModelRequired)
GWI_DEFINE_ERROR(OutOfScope)

#undef GWI_DEFINE_ERROR

}  // namespace gwi
