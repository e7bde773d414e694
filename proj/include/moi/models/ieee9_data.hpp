#pragma once

// Contents of data/ieee9_classical.txt (regenerate with tools/gen_ieee9_classical.py).

namespace moi::models {

inline constexpr const char* kIeee9ClassicalNetwork = R"NET(# Classical 3-machine 9-bus system, Kron-reduced to generator internal nodes.
# Generated by tools/gen_ieee9_classical.py; per-unit on 100 MVA base.
# H column holds 2H/omega_s (s^2/rad), D = 1.0 * (2H/omega_s).
GEN 3
G 1 0.12541409515641355 0.12541409515641355 0.71413211651069375 1.0566140661969283
G 2 0.033953054526271009 0.033953054526271009 1.6299752255065421 1.0502542771381855
G 3 0.015968545956886834 0.015968545956886834 0.85079894779688314 1.0168959285520152
Y 1 1 0.84517157249433683 -2.9879511379427033
Y 1 2 0.2869425360111082 1.5131163471126752
Y 1 3 0.209465491380466 1.2257470584016616
Y 2 2 0.41988221375406332 -2.72376148376991
Y 2 3 0.21319505284616536 1.0880055106575015
Y 3 3 0.27693750148213814 -2.3680727690153001
YFAULT
Y 1 1 0.72374265481313826 -3.4620221709405499
Y 1 2 0.16846355874920776 1.0931919381695652
Y 1 3 0 0
Y 2 2 0.30520294457133079 -3.0954876776192721
Y 2 3 0 0
Y 3 3 0 -5.5157198014340878
FAULT 3 0.2
)NET";

}  // namespace moi::models
