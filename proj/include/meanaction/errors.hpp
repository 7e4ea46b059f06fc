#pragma once

#include <stdexcept>
#include <string>

namespace meanaction {

/// Base of every error thrown by the library. `kind()` is a stable short name
/// used in structured CLI error reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MEANACTION_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    }

MEANACTION_DEFINE_ERROR(DomainError);
MEANACTION_DEFINE_ERROR(IntegratorDivergence);
MEANACTION_DEFINE_ERROR(QuadratureNotConverged);
MEANACTION_DEFINE_ERROR(NonAdmissibleMap);
MEANACTION_DEFINE_ERROR(InfeasibleEta);
MEANACTION_DEFINE_ERROR(RationalityGuardTripped);
MEANACTION_DEFINE_ERROR(NonIntegerP);
MEANACTION_DEFINE_ERROR(FloorGuardTripped);
MEANACTION_DEFINE_ERROR(OrderingMismatch);
MEANACTION_DEFINE_ERROR(RankNotFound);
MEANACTION_DEFINE_ERROR(BoundViolated);
MEANACTION_DEFINE_ERROR(NonPositiveInput);
MEANACTION_DEFINE_ERROR(SpecFormatError);

#undef MEANACTION_DEFINE_ERROR

} // namespace meanaction
