#include "dres/map_core.hpp"

namespace dres {

template struct MapParams<double>;
template struct ModulationSchedule<double>;
template class FrozenMap<double>;

template struct ScheduleTable<double>;
template std::vector<IterateResult<double>> iterate_batch(std::span<const ParticleState<double>>,
                                                          const ScheduleTable<double>&);
template IterateResult<double> iterate(const ParticleState<double>&, const ModulationSchedule<double>&,
                                       const MapParams<double>&);
template Orbit<double> track(const ParticleState<double>&, const MapParams<double>&, std::int64_t,
                             std::int64_t);
template Orbit<double> stroboscopic_orbit(const ParticleState<double>&, const MapParams<double>&, int,
                                          std::int64_t, std::int64_t);

}  // namespace dres
