// Reference values of H0^(1), H1^(1) computed with mpmath (40 digits, 80 for
// large imaginary arguments where J + iY cancels).
// Columns: Re z, Im z, Re H0, Im H0, Re H1, Im H1.
pub const HANKEL_TABLE: &[[f64; 6]] = &[
    [1e-06, 0.0, 0.99999999999975, -8.869031481659444, 4.999999999999375e-07, -636619.772372175],
    [0.0001, 0.0, 0.9999999975, -5.937289069709337, 4.99999999375e-05, -6366.198036455761],
    [0.01, 0.0, 0.9999750001562495, -3.005455637083646, 0.004999937500260416, -63.67859628206066],
    [0.1, 0.0, 0.99750156206604, -1.5342386513503667, 0.049937526036242, -6.4589510947020266],
    [0.31622776601683794, 0.0, 0.975155816649713, -0.7709303079247533, 0.15614567743386049, -2.1879025720164273],
    [1.0, 0.0, 0.7651976865579666, 0.08825696421567696, 0.4400505857449335, -0.7812128213002887],
    [1.9952623149688795, 0.0, 0.22662383608742312, 0.5098622546672654, 0.5770257598654946, -0.10970623429755998],
    [3.1622776601683795, 0.0, -0.3100447889863826, 0.3208977860678689, 0.2764207821365367, 0.36321859101502546],
    [4.897788193684462, 0.0, -0.21043401471292877, -0.2916529070030725, -0.3143720099759001, 0.18197421181811466],
    [6.309573444801933, 0.0, 0.22579232148237338, -0.22273407485126612, -0.20562069261054022, -0.24402379691449513],
    [10.0, 0.0, -0.24593576445134835, 0.055671167283599395, 0.04347274616886144, 0.24901542420695388],
    [19.952623149688797, 0.0, 0.17000601557416994, 0.054722469252055046, 0.058997173120477836, -0.16868873239357837],
    [39.810717055349734, 0.0, 0.031006094120165473, 0.1225908966048335, 0.12298991344233645, -0.029469107479980862],
    [100.0, 0.0, 0.019985850304223122, -0.07724431336508315, -0.07714535201411216, -0.020372312002759792],
    [316.22776601683796, 0.0, 0.012748013916496034, 0.043019229525250245, 0.04303943962786749, -0.012680010647064692],
    [1000.0, 0.0, 0.024786686152420176, 0.0047159179776228135, 0.004728311907089524, -0.024784331292351778],
    [0.5, 0.0, 0.9384698072408129, -0.44451873350670656, 0.2422684576748739, -1.471472392670243],
    [1.0, 0.0, 0.7651976865579666, 0.08825696421567696, 0.4400505857449335, -0.7812128213002887],
    [2.0, 0.0, 0.22389077914123567, 0.5103756726497451, 0.5767248077568734, -0.10703243154093754],
    [4.999, 0.0, -0.17792429435531087, -0.3083695930729175, -0.3274668882084309, 0.14820119642594756],
    [5.001, 0.0, -0.17726913619242535, -0.3086653193349231, -0.3276910500823639, 0.14752501602594079],
    [7.3, 0.0, 0.2882169476350144, 0.06277388637403765, 0.08257043049325788, -0.28459437186807207],
    [12.0, 0.0, 0.047689310796833535, -0.22523731263436145, -0.2234471044906276, -0.05709921826089652],
    [19.99, 0.0, 0.16768479902327915, 0.060981961814838566, 0.06519257814216636, -0.16621268550210397],
    [20.01, 0.0, 0.1663481614896892, 0.06429214025167429, 0.06846618525879421, -0.16479438815068476],
    [33.3, 0.0, 0.0633384859475209, 0.1228974991350375, 0.12386214790148026, -0.06150072280778538],
    [500.0, 0.0, -0.034100556880732, 0.010506708739831373, 0.010472613470372294, 0.03411108062913713],
    [0.3, 0.2, 0.5772492441660396, -0.7245707521415663, -0.7854306483621127, -1.5654099819316434],
    [1.5, 1.5, 0.11257995551780796, 0.033627981475794926, 0.05556529263754037, -0.12596449183925826],
    [3.0, 4.0, -0.0010666528746791275, 0.006321791757978725, 0.006757842292905921, 0.0015041895936947337],
    [0.2, 4.5, 0.0008934254693720513, -0.003973227374178755, -0.004389502210029122, -0.001005851603653909],
    [0.01, 6.0, 8.555486134105732e-06, -0.0007919046591276474, -0.0008555141108858421, -9.345262484957351e-06],
    [4.0, 3.0, -0.01687705649551676, 0.0046085231357402955, 0.003611811604436036, 0.01824993863940385],
    [0.5, 9.0, 1.6280885099500046e-05, -2.7975695764633525e-05, -2.9438692327415464e-05, -1.724201698791929e-05],
    [6.0, 1.0, 0.04613671738446531, -0.10908810919434624, -0.10720153111482929, -0.05557550180767137],
    [10.0, 10.0, -7.852572202546008e-06, 5.474632234776743e-06, 5.419702257553103e-06, 8.18228865705619e-06],
    [2.0, 15.0, 5.479122396327011e-08, 2.9539124260709135e-08, 3.072400345857744e-08, -5.6433366695618665e-08],
    [0.0, 19.0, 0.0, -1.0190189903202935e-09, -1.045499624851564e-09, 0.0],
    [15.0, 5.0, 0.0001222423343341492, 0.0013428390825871994, 0.001360397785156379, -8.364833057492068e-05],
    [21.0, 3.0, 0.0024018327197630873, 0.008275064780756862, 0.008360632803418817, -0.0022181171906961654],
    [1.0, 30.0, 1.1540120297493517e-14, -7.143288173346813e-15, -7.254950844096148e-15, -1.1734596378257995e-14],
    [0.0, 50.0, 0.0, -2.1709802166062558e-23, -2.1925835755836103e-23, 0.0],
    [40.0, 1.0, 0.003287947818092629, 0.04628110795114858, 0.0463402149520899, -0.0027113479011453907],
    [0.4, 0.1, 0.7877066791495737, -0.6070099898914656, -0.1647626760563054, -1.6447693951711084],
    [0.001, 0.002, 0.2951628609367559, -3.9591216316285327, -254.64348393484175, -127.32579802340098],
];
