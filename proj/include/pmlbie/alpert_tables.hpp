#pragma once
// Generated by tools/gen_alpert.py; do not edit.

#include <array>

namespace pmlbie::alpert {

inline constexpr int reg2_a = 1;
inline constexpr std::array<double, 1> reg2_x = {
    1.6666666666666666667e-1,
};
inline constexpr std::array<double, 1> reg2_w = {
    5.0e-1,
};

inline constexpr int log2_a = 1;
inline constexpr std::array<double, 1> log2_x = {
    1.5915494309189533577e-1,
};
inline constexpr std::array<double, 1> log2_w = {
    5.0e-1,
};

inline constexpr int reg6_a = 3;
inline constexpr std::array<double, 3> reg6_x = {
    2.1805406725435050217e-1,
    1.0011818730312164258,
    1.9975805264180329585,
};
inline constexpr std::array<double, 3> reg6_w = {
    5.4080889672081929738e-1,
    9.5166150458235661116e-1,
    1.0075295986968240915,
};

inline constexpr int log6_a = 3;
inline constexpr std::array<double, 5> log6_x = {
    4.0048841949265696177e-3,
    7.7456553733366861324e-2,
    3.9728499935232485938e-1,
    1.0756733529151037443,
    2.003796927111871944,
};
inline constexpr std::array<double, 5> log6_w = {
    1.6718796911471017151e-2,
    1.6369583714473597011e-1,
    4.9818565697706365444e-1,
    8.3722662455789122024e-1,
    9.8417308440883813806e-1,
};

inline constexpr int reg10_a = 5;
inline constexpr std::array<double, 5> reg10_x = {
    1.7529258191194570653e-1,
    8.636487489761271786e-1,
    1.8828396458756476388,
    2.9708465532545923516,
    3.9986592199135793655,
};
inline constexpr std::array<double, 5> reg10_w = {
    4.4279118229006446329e-1,
    8.980917666561196279e-1,
    1.0928847115991344916,
    1.0603159509147442971,
    1.0059163885399371201,
};

inline constexpr int log10_a = 6;
inline constexpr std::array<double, 30> log10_x = {
    1.6666666666666666667e-3,
    1.5e-2,
    4.1666666666666666667e-2,
    8.1666666666666666667e-2,
    1.35e-1,
    2.0166666666666666667e-1,
    2.8166666666666666667e-1,
    3.75e-1,
    4.8166666666666666667e-1,
    6.0166666666666666667e-1,
    7.35e-1,
    8.8166666666666666667e-1,
    1.0416666666666666667,
    1.215,
    1.4016666666666666667,
    1.6016666666666666667,
    1.815,
    2.0416666666666666667,
    2.2816666666666666667,
    2.535,
    2.8016666666666666667,
    3.0816666666666666667,
    3.375,
    3.6816666666666666667,
    4.0016666666666666667,
    4.335,
    4.6816666666666666667,
    5.0416666666666666667,
    5.415,
    5.8016666666666666667,
};
inline constexpr std::array<double, 30> log10_w = {
    5.8738127500628139864e-3,
    1.9621600195505916549e-2,
    3.3065728108695306935e-2,
    5.7983346989078403216e-2,
    3.0708055184747369216e-2,
    9.4800174473166349922e-2,
    1.0583174280767214967e-1,
    7.431722175551292785e-2,
    9.1820400754520954804e-2,
    1.485595109394956554e-1,
    1.7053507061893703129e-1,
    1.4373341246355718777e-1,
    1.2869045447738144294e-1,
    1.687401908088958151e-1,
    2.2859720441579773042e-1,
    2.4164656906693734993e-1,
    2.02048642479286717e-1,
    1.8092777890449822797e-1,
    2.3532075300768546695e-1,
    3.1760751737257848335e-1,
    3.1966458312438156256e-1,
    2.3347317126814786859e-1,
    2.1438067905468809145e-1,
    3.6712880087512982446e-1,
    4.6915149501909542481e-1,
    2.2836949395204372522e-1,
    1.1791786524745948136e-1,
    8.9131159781958911994e-1,
    -2.289407012013112848e-2,
    1.0671961855827298179e-3,
};

}  // namespace pmlbie::alpert
